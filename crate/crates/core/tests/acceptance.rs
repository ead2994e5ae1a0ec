//! Acceptance criteria AC1-AC10, one line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are reported as FAIL when they fail
//! and do not fail the run; any other failure exits non-zero.

use std::time::{Duration, Instant};

use rand::Rng;
use sword_core::detector::{DetectorConfig, DistanceMode, WindowSpec};
use sword_core::eval::{k_sweep, sword_scores, LabelledMoments};
use sword_core::graph::{GraphSnapshot, DEFAULT_DENSE_LIMIT};
use sword_core::kpm::{
    estimate_moments, exact_moments, gamma_discrepancy, moment_distance, verify_wasserstein_bound, BinCount,
    MomentSeries, ProbeSet,
};
use sword_core::methods::MethodConfig;
use sword_core::rng;
use sword_core::scpd::{bin_sweep, scpd_scores, CascadeConfig, CascadeStage};
use sword_core::suites::{
    appendix_b_config, arl_add_suite, baseline_grid, evaluate_fixed, fixed_cfg, hard_er_streams, hard_er_suite,
    matched_add, mean_f1, scaffold_config, synthetic_streams, tune_grid, MomentOptions, PreparedStream, SuiteOptions,
    HARD_ER_P2, SYNTHETIC_FAMILIES,
};
use sword_core::synth::{generate_sequence, ScenarioFamily, ScenarioSpec, SegmentModel};

/// Criteria whose failure is analysed in the project notes.
const KNOWN_FAILURES: [&str; 2] = ["AC3", "AC4"];

type Criterion = (&'static str, fn() -> Outcome, u64);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn ac1() -> Outcome {
    let (n, r, k_max) = (100usize, 30usize, 8usize);
    let tol = 5.0 / ((n * r) as f64).sqrt();
    let spec = ScenarioSpec::stationary(ScenarioFamily::Er, n, 50, SegmentModel::Er { p: 0.1 }, 11);
    let graphs = generate_sequence(&spec).unwrap().snapshots;
    let exact: Vec<_> = graphs
        .iter()
        .map(|g| exact_moments(g, 50, DEFAULT_DENSE_LIMIT).unwrap())
        .collect();
    let mu1_max = exact.iter().map(|m| m.values()[0].abs()).fold(0.0, f64::max);
    let (mut within, mut cells) = (0usize, 0usize);
    for seed in 0..5u64 {
        let probes = ProbeSet::new(r, rng::derive(17, &[seed]));
        for (i, (g, ex)) in graphs.iter().zip(&exact).enumerate() {
            let est = estimate_moments(g, 50, &probes, i as u64).unwrap();
            for j in 0..k_max {
                cells += 1;
                if (est.values()[j] - ex.values()[j]).abs() <= tol {
                    within += 1;
                }
            }
        }
    }
    let frac = within as f64 / cells as f64;
    outcome(
        frac >= 0.99 && mu1_max <= 1e-10,
        format!(
            "{within}/{cells} cells within {tol:.4} ({:.2}%), max |mu_1| = {mu1_max:.1e}",
            100.0 * frac
        ),
    )
}

fn random_graph(rng: &mut impl Rng, n: usize, seed: u64) -> GraphSnapshot {
    let model = match rng.random_range(0..4) {
        0 => SegmentModel::Er {
            p: rng.random_range(0.02..0.5),
        },
        1 => SegmentModel::Sbm {
            blocks: rng.random_range(2..4),
            p_in: rng.random_range(0.2..0.6),
            p_out: rng.random_range(0.0..0.1),
        },
        2 => SegmentModel::Ba {
            m: rng.random_range(1..4),
        },
        _ => SegmentModel::Ws {
            k: 4,
            p: rng.random_range(0.0..1.0),
        },
    };
    let spec = ScenarioSpec::stationary(ScenarioFamily::Er, n, 1, model, seed);
    generate_sequence(&spec).unwrap().snapshots.remove(0)
}

fn ac2() -> Outcome {
    let mut rng = rng::generator(23);
    let (mut bound_ok, mut gamma_ok, mut checks) = (0, 0, 0);
    for pair in 0..100u64 {
        let n = rng.random_range(8..=100);
        let a = random_graph(&mut rng, n, rng::derive(23, &[pair, 0]));
        let b = random_graph(&mut rng, n, rng::derive(23, &[pair, 1]));
        for k in [2, 8, 50] {
            checks += 1;
            let report = verify_wasserstein_bound(&a, &b, k, DEFAULT_DENSE_LIMIT).unwrap();
            bound_ok += report.bound_ok as usize;
            let (ma, mb) = (
                exact_moments(&a, k, DEFAULT_DENSE_LIMIT).unwrap(),
                exact_moments(&b, k, DEFAULT_DENSE_LIMIT).unwrap(),
            );
            let gamma = gamma_discrepancy(&ma, &mb, k).unwrap();
            gamma_ok += (gamma <= moment_distance(&ma, &mb, k).unwrap()) as usize;
        }
    }
    outcome(
        bound_ok == checks && gamma_ok == checks,
        format!("W1 bound held {bound_ok}/{checks}, Gamma <= d_k held {gamma_ok}/{checks}"),
    )
}

fn ac3() -> Outcome {
    let opts = SuiteOptions::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for family in SYNTHETIC_FAMILIES {
        let streams = synthetic_streams(family, &opts, 10).unwrap();
        let sword = MethodConfig::Sword(appendix_b_config(family));
        let (f1, _) = mean_f1(&evaluate_fixed(&sword, &streams, 5).unwrap());
        pass &= f1 >= 0.95;
        parts.push(format!("sword {family:?} {f1:.2}"));
        if matches!(family, ScenarioFamily::Er | ScenarioFamily::Ba) {
            let burn_in = appendix_b_config(family).window.span();
            for m in ["cusum", "ewma"] {
                let best = tune_grid(&baseline_grid(m, burn_in), &streams, 5).unwrap().remove(0);
                pass &= best.mean_f1 <= 0.60;
                parts.push(format!("{m} {family:?} {:.2}", best.mean_f1));
            }
        }
    }
    outcome(pass, parts.join(", "))
}

fn ac4() -> Outcome {
    let report = hard_er_suite(&SuiteOptions::default()).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for p2 in HARD_ER_P2 {
        let sword = report.f1("sword", p2).unwrap();
        let scpd = report.f1("scpd", p2).unwrap();
        pass &= sword >= if p2 < 0.18 { 0.80 } else { 0.90 };
        if p2 >= 0.20 {
            pass &= scpd <= sword - 0.20;
        }
        parts.push(format!("p2={p2:.2}: sword {sword:.2} scpd {scpd:.2}"));
    }
    outcome(pass, parts.join("; "))
}

fn ac5() -> Outcome {
    let spec = ScenarioSpec::er(5);
    let stream = generate_sequence(&spec).unwrap();
    let vectors = stream
        .snapshots
        .iter()
        .enumerate()
        .map(|(i, g)| estimate_moments(g, 50, &ProbeSet::new(30, 5), i as u64).unwrap())
        .collect();
    let series = MomentSeries::new(stream.snapshots.iter().map(|g| g.t()).collect(), vectors).unwrap();
    let window = WindowSpec::symmetric(3);
    let s5 = CascadeConfig {
        window,
        ..CascadeConfig::new(CascadeStage::S5, 20, 0.1, 5)
    };
    let sword = DetectorConfig::new(0.1, window, 20, 5, DistanceMode::Centroid);
    let a = scpd_scores(&series, &s5).unwrap();
    let b = sword_scores(&series, &sword).unwrap();
    let identical = a.len() == b.len()
        && a.iter()
            .zip(&b)
            .all(|(x, y)| x.map(f64::to_bits) == y.map(f64::to_bits));

    let base: Vec<f64> = (1..=12).map(|j| 1.0 / j as f64).collect();
    let drift = MomentSeries::from_values(
        (0..40)
            .map(|t| base.iter().map(|x| x * (1.0 + 0.1 * t as f64)).collect())
            .collect(),
    );
    let stage = |stage| CascadeConfig {
        window,
        ..CascadeConfig::new(stage, 12, 0.1, 5)
    };
    let s3 = scpd_scores(&drift, &stage(CascadeStage::S3)).unwrap();
    let s4 = scpd_scores(&drift, &stage(CascadeStage::S4)).unwrap();
    let s3_max = s3.iter().flatten().fold(0.0, |m: f64, x| m.max(x.abs()));
    let s4_min = s4.iter().flatten().fold(f64::INFINITY, |m: f64, &x| m.min(x));
    outcome(
        identical && s3_max <= 1e-12 && s4_min > 0.0,
        format!("S5 == centroid bitwise: {identical}; scale drift S3 max {s3_max:.1e}, S4 min {s4_min:.3e}"),
    )
}

fn hard_er_moments(opts: &SuiteOptions) -> Vec<LabelledMoments> {
    hard_er_streams(0.2, opts, 20)
        .unwrap()
        .iter()
        .map(PreparedStream::labelled_moments)
        .collect()
}

fn ac6() -> Outcome {
    let streams = hard_er_moments(&SuiteOptions::default());
    let bins = [
        BinCount::Finite(8),
        BinCount::Finite(32),
        BinCount::Finite(128),
        BinCount::Finite(1024),
        BinCount::Infinite,
    ];
    let rows = bin_sweep(&streams, &scaffold_config(), &bins, 5).unwrap();
    let f1: Vec<f64> = rows.iter().map(|r| r.mean_f1).collect();
    let spread = f1.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - f1.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let cells: Vec<String> = rows.iter().map(|r| format!("{}:{:.2}", r.bins, r.mean_f1)).collect();
    outcome(spread <= 0.15, format!("spread {spread:.3} ({})", cells.join(" ")))
}

fn ac7() -> Outcome {
    let curves = arl_add_suite(&SuiteOptions::default()).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for c in &curves {
        let monotone = c.report.rows.windows(2).all(|w| w[0].arl0 <= w[1].arl0);
        if !monotone {
            parts.push(format!("{} dp={} ARL0 not monotone", c.method, c.delta_p));
        }
        pass &= monotone;
    }
    let big: Vec<_> = curves.iter().filter(|c| (c.delta_p - 0.10).abs() < 1e-9).collect();
    let sword = big.iter().find(|c| c.method == "sword").unwrap();
    let full = sword.report.rows.iter().all(|r| r.detection_rate == 1.0);
    pass &= full;
    parts.push(format!(
        "sword detection 100% at all {} points: {full}",
        sword.report.rows.len()
    ));
    let matched = matched_add(&big);
    let add = |m: &str| {
        matched
            .iter()
            .find(|(name, _, _)| name == m)
            .and_then(|(_, _, a)| *a)
            .unwrap_or(f64::INFINITY)
    };
    let (s, l) = (add("sword"), add("lad"));
    pass &= s < l;
    parts.push(format!("matched ADD sword {s:.2} vs lad {l:.2}"));
    outcome(pass, parts.join("; "))
}

fn ac8() -> Outcome {
    let (a, b): (Vec<f64>, Vec<f64>) = (
        (1..=6).map(|j| 0.3 / j as f64).collect(),
        (1..=6).map(|j| 0.01 * j as f64).collect(),
    );
    let series = MomentSeries::from_values(
        (0..60)
            .map(|t| a.iter().zip(&b).map(|(x, y)| x + y * t as f64).collect())
            .collect(),
    );
    let windows = [
        WindowSpec::symmetric(3),
        WindowSpec::asymmetric(2, 5),
        WindowSpec::symmetric(4).exponential(0.7),
    ];
    let mut worst = 0.0f64;
    for mode in [
        DistanceMode::MeanPairwise,
        DistanceMode::Centroid,
        DistanceMode::WeightedGamma,
    ] {
        for window in windows {
            let cfg = DetectorConfig::new(f64::INFINITY, window, 6, 1, mode);
            let d: Vec<f64> = sword_scores(&series, &cfg).unwrap().into_iter().flatten().collect();
            let hi = d.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
            let lo = d.iter().fold(f64::INFINITY, |m, &x| m.min(x));
            worst = worst.max(hi - lo);
        }
    }
    outcome(
        worst <= 1e-12,
        format!("max variation of D_t {worst:.1e} over 3 modes x 3 windows"),
    )
}

fn er_with_edges(n: usize, m: usize, seed: u64) -> GraphSnapshot {
    let p = 2.0 * m as f64 / (n as f64 * (n - 1) as f64);
    let spec = ScenarioSpec::stationary(ScenarioFamily::Er, n, 1, SegmentModel::Er { p }, seed);
    generate_sequence(&spec).unwrap().snapshots.remove(0)
}

fn median_time(g: &GraphSnapshot) -> Duration {
    let probes = ProbeSet::new(30, 3);
    let mut times: Vec<Duration> = (0..5)
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(estimate_moments(g, 50, &probes, 0).unwrap());
            start.elapsed()
        })
        .collect();
    times.sort();
    times[2]
}

fn ac9() -> Outcome {
    let n = 2000;
    let small = er_with_edges(n, 40_000, 1);
    let large = er_with_edges(n, 80_000, 2);
    let (a, b) = (median_time(&small), median_time(&large));
    let ratio = b.as_secs_f64() / a.as_secs_f64();
    outcome(
        (1.4..=2.6).contains(&ratio),
        format!(
            "m={} {:.1} ms, m={} {:.1} ms, ratio {ratio:.2}",
            small.edge_count(),
            a.as_secs_f64() * 1e3,
            large.edge_count(),
            b.as_secs_f64() * 1e3
        ),
    )
}

fn ac10() -> Outcome {
    let opts = SuiteOptions {
        moments: MomentOptions {
            exact: true,
            ..MomentOptions::default()
        },
        ..SuiteOptions::default()
    };
    let streams = hard_er_moments(&opts);
    let ks: Vec<usize> = (1..=30).collect();
    let rows = k_sweep(&streams, &fixed_cfg(), &ks, 5).unwrap();
    let f1 = |k: usize| rows[k - 1].mean_f1;
    let global = rows.iter().map(|r| r.mean_f1).fold(0.0, f64::max);
    let early = (2..=5).map(f1).fold(0.0, f64::max);
    let late = (8..=30).map(f1).fold(0.0, f64::max);
    let pass = f1(1) == 0.0 && early >= global && late <= f1(8) + 0.05;
    outcome(
        pass,
        format!(
            "F1(k=1) {:.2}, best in [2,5] {early:.2} vs global {global:.2}, F1(8) {:.2}, max over [8,30] {late:.2}",
            f1(1),
            f1(8)
        ),
    )
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [Criterion; 10] = [
        ("AC1", ac1, 60),
        ("AC2", ac2, 60),
        ("AC3", ac3, 600),
        ("AC4", ac4, 900),
        ("AC5", ac5, 60),
        ("AC6", ac6, 600),
        ("AC7", ac7, 1200),
        ("AC8", ac8, 1),
        ("AC9", ac9, 120),
        ("AC10", ac10, 600),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut unexpected = Vec::new();
    for (id, run, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == id) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        let in_time = secs < budget as f64;
        let pass = o.pass && in_time;
        let known = KNOWN_FAILURES.contains(&id);
        let verdict = match (pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("{id}: {verdict} [{secs:.1}s / {budget}s] {}", o.detail);
        if !pass && !known {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {}", unexpected.join(", "));
        std::process::exit(1);
    }
}
