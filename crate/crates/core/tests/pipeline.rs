use sword_core::detector::{detect_stream, read_score_csv, write_score_csv};
use sword_core::eval::match_detections;
use sword_core::graph::{load_snapshot_stream, write_snapshot_stream};
use sword_core::kpm::{estimate_stream, read_moment_cache, write_moment_cache, MomentSeries, ProbeSet};
use sword_core::methods::{MethodConfig, StreamData};
use sword_core::suites::{
    appendix_b_config, prepare_streams, run_suite, score_tracks, tune_grid, MomentOptions, SuiteOptions,
};
use sword_core::synth::{generate_sequence, read_ground_truth, write_ground_truth, ScenarioFamily, ScenarioSpec};

#[test]
fn files_round_trip_through_detection() {
    let dir = tempfile::tempdir().unwrap();
    let stream = generate_sequence(&ScenarioSpec::er(9)).unwrap();
    let snaps = dir.path().join("s.jsonl");
    let truth = dir.path().join("t.json");
    write_snapshot_stream(&snaps, &stream.snapshots).unwrap();
    write_ground_truth(&truth, &stream.change_points).unwrap();

    let loaded = load_snapshot_stream(&snaps).unwrap();
    assert_eq!(loaded.snapshots, stream.snapshots);
    let vectors = estimate_stream(&loaded.snapshots, 50, &ProbeSet::new(30, 9)).unwrap();
    let series = MomentSeries::new(loaded.snapshots.iter().map(|g| g.t()).collect(), vectors).unwrap();
    let cache = dir.path().join("m.csv");
    write_moment_cache(&cache, &series).unwrap();
    let reread = read_moment_cache(&cache).unwrap();
    assert_eq!(reread.len(), 100);
    assert_eq!(reread.order(), 50);

    let out = detect_stream(&reread, &appendix_b_config(ScenarioFamily::Er)).unwrap();
    let scores = dir.path().join("scores.csv");
    write_score_csv(&scores, &out).unwrap();
    assert_eq!(read_score_csv(&scores).unwrap().detections, out.detections);
    let report = match_detections(&read_ground_truth(&truth).unwrap(), &out.detections, 5);
    assert_eq!(report.f1, 1.0, "{:?}", out.detections);
}

#[test]
fn prepared_streams_are_seed_deterministic() {
    let opts = MomentOptions {
        order: 10,
        probes: 5,
        ..MomentOptions::default()
    };
    let a = prepare_streams(ScenarioSpec::ba, 2, 4, 1, &opts).unwrap();
    let b = prepare_streams(ScenarioSpec::ba, 2, 4, 1, &opts).unwrap();
    let c = prepare_streams(ScenarioSpec::ba, 2, 5, 1, &opts).unwrap();
    assert_eq!(a[1].moments(), b[1].moments());
    assert_ne!(a[1].moments(), c[1].moments());
    assert_ne!(a[0].moments(), a[1].moments());
}

#[test]
fn every_method_scores_a_prepared_stream() {
    let opts = MomentOptions {
        order: 20,
        probes: 10,
        ..MomentOptions::default()
    };
    let streams = prepare_streams(ScenarioSpec::er, 1, 2, 1, &opts).unwrap();
    let burn_in = 6;
    let mut methods = vec![MethodConfig::Sword(appendix_b_config(ScenarioFamily::Er))];
    for m in ["scpd", "laddos", "lad", "cusum", "ewma"] {
        methods.push(sword_core::suites::baseline_grid(m, burn_in)[0]);
    }
    for m in methods {
        let tracks = score_tracks(&m, &streams).unwrap();
        assert_eq!(tracks[0].scores.len(), 100, "{}", m.name());
        assert!(
            tracks[0].scores.iter().flatten().all(|s| s.is_finite() && *s >= 0.0),
            "{}",
            m.name()
        );
    }
}

#[test]
fn tuned_grid_is_ranked() {
    let opts = MomentOptions {
        order: 20,
        probes: 10,
        ..MomentOptions::default()
    };
    let streams = prepare_streams(ScenarioSpec::sbm, 3, 2, 1, &opts).unwrap();
    let rows = tune_grid(&sword_core::suites::baseline_grid("cusum", 8), &streams, 5).unwrap();
    assert_eq!(rows.len(), 16);
    assert!(rows.windows(2).all(|w| w[0].mean_f1 >= w[1].mean_f1));
    let best = rows[0].config;
    let data: Vec<&StreamData> = streams.iter().map(|s| &s.data).collect();
    let f1: f64 = data
        .iter()
        .zip(&streams)
        .map(|(d, s)| match_detections(&s.change_points, &best.detect(d).unwrap().detections, 5).f1)
        .sum::<f64>()
        / 3.0;
    assert!((f1 - rows[0].mean_f1).abs() < 1e-12);
}

#[test]
fn small_suites_emit_tables() {
    let opts = SuiteOptions {
        seeds: Some(2),
        moments: MomentOptions {
            order: 20,
            probes: 10,
            ..MomentOptions::default()
        },
        ..SuiteOptions::default()
    };
    let report = run_suite("bin-sweep", &opts).unwrap();
    assert_eq!(report.tables[0].rows.len(), 9);
    let report = run_suite("k-sweep", &opts).unwrap();
    assert_eq!(report.tables[0].rows.len(), 40);
    assert!(report.tables[0].rows[0][0] == "1" && report.tables[0].rows[0][2] == "0.0000");
}
