use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn sword(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sword"))
        .args(args)
        .env("RUST_BACKTRACE", "0")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = sword(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fail(args: &[&str]) -> String {
    let out = sword(args);
    assert!(!out.status.success(), "{args:?} should fail");
    String::from_utf8(out.stderr).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn generate(dir: &Path, scenario: &str, seed: u64) -> PathBuf {
    ok(&[
        "--seed",
        &seed.to_string(),
        "generate",
        "--scenario",
        scenario,
        "--out",
        p(dir),
    ]);
    dir.to_path_buf()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn detections(dir: &Path) -> Vec<u64> {
    serde_json::from_str(&fs::read_to_string(dir.join("detections.json")).unwrap()).unwrap()
}

#[test]
fn generate_writes_stream_truth_and_manifest() {
    let tmp = TempDir::new().unwrap();
    let g = generate(&tmp.path().join("g"), "er", 1);
    let lines = fs::read_to_string(g.join("snapshots.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 100);
    let truth: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(g.join("ground_truth.json")).unwrap()).unwrap();
    assert_eq!(truth["change_points"], serde_json::json!([50]));
    let m = manifest(&g);
    assert_eq!(m["command"], "generate");
    assert_eq!(m["seed"], 1);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
    assert_eq!(m["outputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn generate_is_reproducible_per_seed() {
    let tmp = TempDir::new().unwrap();
    let read = |d: &Path| fs::read(d.join("snapshots.jsonl")).unwrap();
    let a = generate(&tmp.path().join("a"), "sbm", 4);
    let b = generate(&tmp.path().join("b"), "sbm", 4);
    let c = generate(&tmp.path().join("c"), "sbm", 5);
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert_eq!(
        manifest(&a)["outputs"][0]["sha256"],
        manifest(&b)["outputs"][0]["sha256"]
    );
}

#[test]
fn generate_rejects_invalid_probability() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(
        &cfg,
        "family = \"er\"\nn = 20\nlength = 10\nchange_points = []\nseed = 0\n\n[[segments]]\nmodel = \"er\"\np = 1.5\n",
    )
    .unwrap();
    let err = fail(&["generate", "--config", p(&cfg), "--out", p(&tmp.path().join("g"))]);
    assert!(err.contains("validation"), "{err}");
}

#[test]
fn moments_cache_shape_and_exact_first_moment() {
    let tmp = TempDir::new().unwrap();
    let g = generate(&tmp.path().join("g"), "er", 2);
    let snaps = g.join("snapshots.jsonl");
    let est = tmp.path().join("est");
    ok(&["moments", "--input", p(&snaps), "--out", p(&est)]);
    let text = fs::read_to_string(est.join("moments.csv")).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 101);
    assert!(rows.iter().all(|r| r.split(',').count() == 51));

    let exact = tmp.path().join("exact");
    ok(&["moments", "--input", p(&snaps), "--exact", "--out", p(&exact)]);
    let text = fs::read_to_string(exact.join("moments.csv")).unwrap();
    for row in text.lines().skip(1) {
        let mu1: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!(mu1.abs() <= 1e-10, "{mu1}");
    }
}

#[test]
fn moments_missing_input_is_io_error() {
    let tmp = TempDir::new().unwrap();
    let err = fail(&[
        "moments",
        "--input",
        p(&tmp.path().join("none.jsonl")),
        "--out",
        p(tmp.path()),
    ]);
    assert!(err.to_lowercase().contains("no such file"), "{err}");
}

#[test]
fn sword_detects_er_change_on_most_seeds() {
    let tmp = TempDir::new().unwrap();
    let mut hits = 0;
    for seed in 0..10u64 {
        let g = generate(&tmp.path().join(format!("g{seed}")), "er", seed);
        let d = tmp.path().join(format!("d{seed}"));
        ok(&[
            "--seed",
            &seed.to_string(),
            "detect",
            "--method",
            "sword",
            "--snapshots",
            p(&g.join("snapshots.jsonl")),
            "--out",
            p(&d),
        ]);
        if detections(&d).iter().any(|&t| (50..=55).contains(&t)) {
            hits += 1;
        }
    }
    assert!(hits >= 9, "{hits}/10");
}

#[test]
fn infinite_threshold_never_alarms() {
    let tmp = TempDir::new().unwrap();
    let g = generate(&tmp.path().join("g"), "er", 3);
    let d = tmp.path().join("d");
    ok(&[
        "detect",
        "--method",
        "sword",
        "--threshold",
        "inf",
        "--snapshots",
        p(&g.join("snapshots.jsonl")),
        "--out",
        p(&d),
    ]);
    assert!(detections(&d).is_empty());
}

#[test]
fn s5_stage_matches_centroid_sword() {
    let tmp = TempDir::new().unwrap();
    let g = generate(&tmp.path().join("g"), "er", 4);
    let m = tmp.path().join("m");
    ok(&["moments", "--input", p(&g.join("snapshots.jsonl")), "--out", p(&m)]);
    let cache = m.join("moments.csv");
    let sword_cfg = tmp.path().join("sword.toml");
    fs::write(
        &sword_cfg,
        "method = \"sword\"\nthreshold = 0.1\norder = 20\ncooldown = 5\nmode = \"centroid\"\n\n[window]\ntest = 3\nreference = 3\n",
    )
    .unwrap();
    let scpd_cfg = tmp.path().join("scpd.toml");
    fs::write(
        &scpd_cfg,
        "method = \"scpd\"\nstage = \"s5\"\norder = 20\nthreshold = 0.1\ncooldown = 5\n\n[window]\ntest = 3\nreference = 3\n",
    )
    .unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&[
        "detect",
        "--config",
        p(&sword_cfg),
        "--moments",
        p(&cache),
        "--out",
        p(&a),
    ]);
    ok(&[
        "detect",
        "--config",
        p(&scpd_cfg),
        "--moments",
        p(&cache),
        "--out",
        p(&b),
    ]);
    assert_eq!(
        fs::read(a.join("scores.csv")).unwrap(),
        fs::read(b.join("scores.csv")).unwrap()
    );
}

#[test]
fn feature_baselines_need_snapshots() {
    let tmp = TempDir::new().unwrap();
    let g = generate(&tmp.path().join("g"), "er", 5);
    let m = tmp.path().join("m");
    ok(&["moments", "--input", p(&g.join("snapshots.jsonl")), "--out", p(&m)]);
    let err = fail(&[
        "detect",
        "--method",
        "cusum",
        "--moments",
        p(&m.join("moments.csv")),
        "--out",
        p(tmp.path()),
    ]);
    assert!(err.contains("--snapshots"), "{err}");
    let d = tmp.path().join("d");
    ok(&[
        "detect",
        "--method",
        "ewma",
        "--snapshots",
        p(&g.join("snapshots.jsonl")),
        "--ground-truth",
        p(&g.join("ground_truth.json")),
        "--out",
        p(&d),
    ]);
    assert!(d.join("evaluation.json").exists());
}

#[test]
fn bench_unknown_suite_lists_available() {
    let tmp = TempDir::new().unwrap();
    let err = fail(&["bench", "--suite", "tables", "--out", p(tmp.path())]);
    for s in [
        "synthetic",
        "hard-er",
        "hard-sbm",
        "arl-add",
        "bin-sweep",
        "cascade",
        "k-sweep",
    ] {
        assert!(err.contains(s), "{err}");
    }
}

#[test]
fn bench_writes_tables_and_is_idempotent() {
    let tmp = TempDir::new().unwrap();
    let run = |dir: &Path| {
        ok(&[
            "--seed",
            "3",
            "bench",
            "--suite",
            "cascade",
            "--seeds",
            "2",
            "--out",
            p(dir),
        ]);
        fs::read(dir.join("cascade.csv")).unwrap()
    };
    let a = run(&tmp.path().join("a"));
    let b = run(&tmp.path().join("b"));
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().next().unwrap(), "stage,dataset,seed,f1");
    assert_eq!(text.lines().count(), 1 + 7 * 2 * 2);
    let m = manifest(&tmp.path().join("a"));
    assert_eq!(m["command"], "bench");
    assert!(m["peak_rss_kib"].as_u64().unwrap() > 0);
}

#[test]
fn sweep_ranks_grid() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("grid.toml");
    fs::write(
        &cfg,
        r#"scenario = "er"
seeds = 3
top = 4

[moments]
order = 10
probes = 10
exact = false

[base]
method = "sword"
threshold = 0.02
order = 2
cooldown = 5
mode = "weighted_gamma"
window = { test = 3, reference = 3 }

[axes]
threshold = [0.02, 1000.0]
"window.test" = [2, 3]
cooldown = [5, 10]
"#,
    )
    .unwrap();
    let out = tmp.path().join("out");
    ok(&["sweep", "--config", p(&cfg), "--out", p(&out)]);
    let text = fs::read_to_string(out.join("grid.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    let f1: Vec<f64> = rows
        .iter()
        .map(|r| r.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(f1.windows(2).all(|w| w[0] >= w[1]));
    assert!(!text.contains("1000.0"), "never-firing configs rank last");
}

#[test]
fn arl_reports_monotone_run_lengths() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("arl.toml");
    fs::write(
        &cfg,
        r#"n = 30
t_null = 120
t_change = 60
runs = 3
thresholds = [0.01, 0.05, 0.2, 1.0]

[moments]
order = 10
probes = 10
exact = false

[method]
method = "sword"
threshold = 0.02
order = 2
cooldown = 5
mode = "weighted_gamma"
window = { test = 3, reference = 3 }
"#,
    )
    .unwrap();
    let out = tmp.path().join("out");
    ok(&["arl", "--config", p(&cfg), "--out", p(&out)]);
    let text = fs::read_to_string(out.join("arl.csv")).unwrap();
    let arl: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|r| r.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(arl.len(), 4);
    assert!(arl.windows(2).all(|w| w[0] <= w[1]), "{arl:?}");
}

#[test]
fn ksweep_writes_one_row_per_k() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    ok(&[
        "ksweep",
        "--ks",
        "1-4",
        "--seeds",
        "2",
        "--exact",
        "--order",
        "10",
        "--out",
        p(&out),
    ]);
    let text = fs::read_to_string(out.join("k_sweep.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("1,0.0000,"), "{}", rows[0]);
    let err = fail(&[
        "ksweep",
        "--ks",
        "5-60",
        "--seeds",
        "1",
        "--exact",
        "--order",
        "10",
        "--out",
        p(&out),
    ]);
    assert!(err.contains("out of range"), "{err}");
}
