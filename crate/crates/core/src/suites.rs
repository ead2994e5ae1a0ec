//! Benchmark suites: synthetic streams are generated, summarised, scored by
//! every method and evaluated with one-sided matching.
//!
//! Seeds: stream `i` of a scenario tagged `tag` uses graph seed
//! `derive(root, [tag, i])` and probe seed `derive(root, [PROBES, tag, i])`,
//! so any cell can be recomputed in isolation.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{CusumConfig, EwmaConfig, LadConfig};
use crate::detector::{DetectorConfig, DistanceMode, WindowSpec};
use crate::eval::{
    grid_search, k_sweep, mean_std, measure_arl_add, tune_threshold, ArlAddReport, GridRow, KSweepRow, LabelledMoments,
    LabelledScores, MatchReport,
};
use crate::graph::DEFAULT_DENSE_LIMIT;
use crate::kpm::{
    estimate_stream, exact_stream, BinCount, MomentSeries, ProbeSet, ProbeSharing, DEFAULT_ORDER, DEFAULT_PROBES,
};
use crate::methods::{MethodConfig, StreamData};
use crate::rng::{self, derive};
use crate::scpd::{bin_sweep, CascadeConfig, CascadeStage};
use crate::synth::{generate_sequence, ScenarioFamily, ScenarioSpec, SegmentModel};
use crate::{Error, Result};

pub const SUITES: [&str; 9] = [
    "synthetic",
    "hard-er",
    "hard-sbm",
    "arl-add",
    "bin-sweep",
    "cascade",
    "k-sweep",
    "distance-modes",
    "windows",
];

pub const COOLDOWNS: [usize; 4] = [5, 7, 10, 15];
pub const HARD_ER_P2: [f64; 7] = [0.15, 0.18, 0.20, 0.22, 0.25, 0.30, 0.40];
pub const HARD_SBM_P_OUT: [f64; 7] = [0.02, 0.05, 0.08, 0.10, 0.15, 0.20, 0.25];
pub const SWEEP_BINS: [BinCount; 9] = [
    BinCount::Finite(8),
    BinCount::Finite(16),
    BinCount::Finite(32),
    BinCount::Finite(64),
    BinCount::Finite(128),
    BinCount::Finite(256),
    BinCount::Finite(512),
    BinCount::Finite(1024),
    BinCount::Infinite,
];
/// Null-score quantiles at which ARL/ADD thresholds are placed.
pub const ARL_QUANTILES: [f64; 8] = [0.5, 0.8, 0.9, 0.95, 0.99, 0.995, 0.999, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentOptions {
    pub order: usize,
    pub probes: usize,
    /// Dense-spectrum moments instead of Hutchinson estimates.
    pub exact: bool,
    #[serde(default)]
    pub sharing: ProbeSharing,
}

impl Default for MomentOptions {
    fn default() -> Self {
        Self {
            order: DEFAULT_ORDER,
            probes: DEFAULT_PROBES,
            exact: false,
            sharing: ProbeSharing::Fresh,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Graph seeds per scenario; `None` uses the suite's default.
    pub seeds: Option<usize>,
    pub moments: MomentOptions,
    pub tolerance: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            seeds: None,
            moments: MomentOptions::default(),
            tolerance: 5,
        }
    }
}

impl SuiteOptions {
    fn seeds_or(&self, default: usize) -> usize {
        self.seeds.unwrap_or(default)
    }
}

/// One generated stream with everything any method needs.
#[derive(Debug, Clone)]
pub struct PreparedStream {
    pub data: StreamData,
    pub change_points: Vec<u64>,
}

impl PreparedStream {
    pub fn moments(&self) -> &MomentSeries {
        self.data.moments.as_ref().expect("prepared streams carry moments")
    }

    pub fn labelled_moments(&self) -> LabelledMoments {
        LabelledMoments {
            moments: self.moments().clone(),
            change_points: self.change_points.clone(),
        }
    }
}

/// Generates a scenario and summarises every snapshot.
pub fn prepare_stream(spec: &ScenarioSpec, moments: &MomentOptions, probe_seed: u64) -> Result<PreparedStream> {
    let stream = generate_sequence(spec)?;
    let vectors = if moments.exact {
        exact_stream(&stream.snapshots, moments.order, DEFAULT_DENSE_LIMIT)?
    } else {
        estimate_stream(
            &stream.snapshots,
            moments.order,
            &ProbeSet {
                sharing: moments.sharing,
                ..ProbeSet::new(moments.probes, probe_seed)
            },
        )?
    };
    let times = stream.snapshots.iter().map(|g| g.t()).collect();
    let series = MomentSeries::new(times, vectors)?;
    Ok(PreparedStream {
        data: StreamData::from_snapshots(stream.snapshots, Some(series)),
        change_points: stream.change_points,
    })
}

/// `count` streams of one scenario family, seeded below `root` under `tag`.
pub fn prepare_streams(
    make: impl Fn(u64) -> ScenarioSpec + Sync,
    count: usize,
    root: u64,
    tag: u64,
    moments: &MomentOptions,
) -> Result<Vec<PreparedStream>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let spec = make(derive(root, &[tag, i]));
            prepare_stream(&spec, moments, derive(root, &[rng::domain::PROBES, tag, i]))
        })
        .collect()
}

/// Raw score tracks of one method on every stream.
pub fn score_tracks(method: &MethodConfig, streams: &[PreparedStream]) -> Result<Vec<LabelledScores>> {
    streams
        .par_iter()
        .map(|s| {
            Ok(LabelledScores {
                times: s.data.times.clone(),
                scores: method.scores(&s.data)?,
                change_points: s.change_points.clone(),
            })
        })
        .collect()
}

/// Per-stream match reports for a fully specified method.
pub fn evaluate_fixed(method: &MethodConfig, streams: &[PreparedStream], tolerance: u64) -> Result<Vec<MatchReport>> {
    streams
        .par_iter()
        .map(|s| {
            let out = method.detect(&s.data)?;
            Ok(crate::eval::match_detections(
                &s.change_points,
                &out.detections,
                tolerance,
            ))
        })
        .collect()
}

pub fn mean_f1(reports: &[MatchReport]) -> (f64, f64) {
    mean_std(&reports.iter().map(|r| r.f1).collect::<Vec<_>>())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunedRow {
    /// Config with the tuned threshold filled in.
    pub config: MethodConfig,
    pub mean_f1: f64,
    pub std_f1: f64,
    pub false_positives: usize,
}

/// Tunes the threshold of every config on `streams` (pooled) and ranks the
/// results by mean F1, then fewer false positives, then smaller span.
/// Configs sharing a score track are scored once.
pub fn tune_grid(configs: &[MethodConfig], streams: &[PreparedStream], tolerance: u64) -> Result<Vec<TunedRow>> {
    if configs.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    let mut groups: BTreeMap<String, MethodConfig> = BTreeMap::new();
    for c in configs {
        groups.entry(c.score_key()).or_insert(*c);
    }
    let tracks: HashMap<String, Vec<LabelledScores>> = groups
        .into_par_iter()
        .map(|(key, c)| Ok((key, score_tracks(&c, streams)?)))
        .collect::<Result<_>>()?;
    let mut rows: Vec<(usize, TunedRow)> = configs
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let t = tune_threshold(&tracks[&c.score_key()], c.cooldown(), tolerance);
            (
                i,
                TunedRow {
                    config: c.with_threshold(t.threshold),
                    mean_f1: t.mean_f1,
                    std_f1: t.std_f1,
                    false_positives: t.false_positives,
                },
            )
        })
        .collect();
    rows.sort_by(|(i, a), (j, b)| {
        b.mean_f1
            .total_cmp(&a.mean_f1)
            .then(a.false_positives.cmp(&b.false_positives))
            .then(a.config.span().cmp(&b.config.span()))
            .then(i.cmp(j))
    });
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

/// Best SWORD settings per synthetic family.
pub fn appendix_b_config(family: ScenarioFamily) -> DetectorConfig {
    let (theta, w, k, c) = match family {
        ScenarioFamily::Er | ScenarioFamily::MultiCp => (0.02, 3, 2, 5),
        ScenarioFamily::Sbm | ScenarioFamily::HardSbm => (0.02, 4, 2, 7),
        ScenarioFamily::Ba => (0.05, 2, 2, 15),
        ScenarioFamily::Ws => (0.02, 7, 3, 15),
        ScenarioFamily::HardEr => return fixed_cfg(),
    };
    DetectorConfig::new(theta, WindowSpec::symmetric(w), k, c, DistanceMode::WeightedGamma)
}

/// The single in-sample configuration used on the hard ER benchmark.
pub fn fixed_cfg() -> DetectorConfig {
    DetectorConfig::new(0.005, WindowSpec::symmetric(2), 4, 7, DistanceMode::WeightedGamma)
}

/// Baseline grids; thresholds are tuned, so they are placeholders here.
pub fn baseline_grid(method: &str, burn_in: usize) -> Vec<MethodConfig> {
    let mut out = Vec::new();
    for &c in &COOLDOWNS {
        match method {
            "cusum" => {
                for kappa in [0.25, 0.5, 1.0, 2.0] {
                    out.push(MethodConfig::Cusum(CusumConfig {
                        kappa,
                        threshold: 0.0,
                        burn_in,
                        cooldown: c,
                    }));
                }
            }
            "ewma" => {
                for lambda in [0.1, 0.2, 0.3, 0.5, 1.0] {
                    out.push(MethodConfig::Ewma(EwmaConfig {
                        lambda,
                        width: 0.0,
                        burn_in,
                        cooldown: c,
                    }));
                }
            }
            "lad" => {
                for rank in [3, 6, 10] {
                    out.push(MethodConfig::Lad(LadConfig {
                        rank,
                        ..LadConfig::new(0.0, c)
                    }));
                }
            }
            "scpd" | "laddos" => {
                for order in [10, 20, 50] {
                    let cfg = CascadeConfig::new(CascadeStage::S0, order, 0.0, c);
                    out.push(if method == "scpd" {
                        MethodConfig::Scpd(cfg)
                    } else {
                        MethodConfig::Laddos(cfg)
                    });
                }
            }
            _ => {}
        }
    }
    out
}

pub const BASELINES: [&str; 5] = ["scpd", "laddos", "lad", "cusum", "ewma"];

/// A CSV-shaped result table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Writes `<dir>/<name>.csv` through a temporary file and a rename.
    pub fn write_csv(&self, dir: impl AsRef<Path>) -> Result<std::path::PathBuf> {
        let path = dir.as_ref().join(format!("{}.csv", self.name));
        let tmp = dir.as_ref().join(format!(".{}.csv.tmp", self.name));
        {
            let mut w = csv::Writer::from_path(&tmp)?;
            w.write_record(&self.columns)?;
            for r in &self.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }
}

fn num(x: f64) -> String {
    format!("{x:.4}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub tables: Vec<Table>,
}

/// Runs a suite by name.
pub fn run_suite(name: &str, opts: &SuiteOptions) -> Result<SuiteReport> {
    let tables = match name {
        "synthetic" => synthetic_tables(&synthetic_suite(opts)?),
        "hard-er" => hard_tables("hard_er", "p2", &hard_er_suite(opts)?),
        "hard-sbm" => hard_tables("hard_sbm", "p_out", &hard_sbm_suite(opts)?),
        "arl-add" => arl_tables(&arl_add_suite(opts)?),
        "bin-sweep" => bin_sweep_tables(&bin_sweep_suite(opts)?),
        "cascade" => cascade_tables(&cascade_suite(opts)?),
        "k-sweep" => k_sweep_tables(&k_sweep_suite(opts)?),
        "distance-modes" => ablation_tables("distance_modes", &distance_mode_suite(opts)?),
        "windows" => ablation_tables("windows", &window_suite(opts)?),
        other => {
            return Err(Error::Config(format!(
                "unknown suite {other:?}; available: {}",
                SUITES.join(", ")
            )))
        }
    };
    Ok(SuiteReport {
        suite: name.into(),
        tables,
    })
}

const TAG_SYNTHETIC: u64 = 1;
const TAG_HARD_ER: u64 = 2;
const TAG_HARD_SBM: u64 = 3;
const TAG_ARL_NULL: u64 = 4;
const TAG_ARL_CHANGE: u64 = 5;

fn family_tag(family: ScenarioFamily) -> u64 {
    TAG_SYNTHETIC * 100 + family as u64
}

pub const SYNTHETIC_FAMILIES: [ScenarioFamily; 5] = [
    ScenarioFamily::Er,
    ScenarioFamily::Sbm,
    ScenarioFamily::Ba,
    ScenarioFamily::Ws,
    ScenarioFamily::MultiCp,
];

pub fn family_name(family: ScenarioFamily) -> &'static str {
    match family {
        ScenarioFamily::Er => "er",
        ScenarioFamily::Sbm => "sbm",
        ScenarioFamily::Ba => "ba",
        ScenarioFamily::Ws => "ws",
        ScenarioFamily::MultiCp => "multi_cp",
        ScenarioFamily::HardEr => "hard_er",
        ScenarioFamily::HardSbm => "hard_sbm",
    }
}

fn family_spec(family: ScenarioFamily) -> fn(u64) -> ScenarioSpec {
    match family {
        ScenarioFamily::Er => ScenarioSpec::er,
        ScenarioFamily::Sbm => ScenarioSpec::sbm,
        ScenarioFamily::Ba => ScenarioSpec::ba,
        ScenarioFamily::Ws => ScenarioSpec::ws,
        ScenarioFamily::MultiCp => ScenarioSpec::multi_cp,
        ScenarioFamily::HardEr => |s| ScenarioSpec::hard_er(0.2, s),
        ScenarioFamily::HardSbm => |s| ScenarioSpec::hard_sbm(0.05, s),
    }
}

/// Streams of one synthetic family under the suite's seeding.
pub fn synthetic_streams(
    family: ScenarioFamily,
    opts: &SuiteOptions,
    default_seeds: usize,
) -> Result<Vec<PreparedStream>> {
    prepare_streams(
        family_spec(family),
        opts.seeds_or(default_seeds),
        opts.seed,
        family_tag(family),
        &opts.moments,
    )
}

pub fn hard_er_streams(p2: f64, opts: &SuiteOptions, default_seeds: usize) -> Result<Vec<PreparedStream>> {
    let tag = TAG_HARD_ER * 1000 + (p2 * 100.0).round() as u64;
    prepare_streams(
        |s| ScenarioSpec::hard_er(p2, s),
        opts.seeds_or(default_seeds),
        opts.seed,
        tag,
        &opts.moments,
    )
}

pub fn hard_sbm_streams(p_out: f64, opts: &SuiteOptions, default_seeds: usize) -> Result<Vec<PreparedStream>> {
    let tag = TAG_HARD_SBM * 1000 + (p_out * 100.0).round() as u64;
    prepare_streams(
        |s| ScenarioSpec::hard_sbm(p_out, s),
        opts.seeds_or(default_seeds),
        opts.seed,
        tag,
        &opts.moments,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodScore {
    pub method: String,
    pub scenario: String,
    pub mean_f1: f64,
    pub std_f1: f64,
    /// Configuration the number was obtained with.
    pub config: MethodConfig,
}

/// SWORD at its per-family configuration and every baseline tuned on the
/// same family, 10 seeds by default.
pub fn synthetic_suite(opts: &SuiteOptions) -> Result<Vec<MethodScore>> {
    let mut out = Vec::new();
    for family in SYNTHETIC_FAMILIES {
        let streams = synthetic_streams(family, opts, 10)?;
        let sword = MethodConfig::Sword(appendix_b_config(family));
        let (mean, std) = mean_f1(&evaluate_fixed(&sword, &streams, opts.tolerance)?);
        out.push(MethodScore {
            method: "sword".into(),
            scenario: family_name(family).into(),
            mean_f1: mean,
            std_f1: std,
            config: sword,
        });
        let burn_in = appendix_b_config(family).window.span();
        for method in BASELINES {
            let best = tune_grid(&baseline_grid(method, burn_in), &streams, opts.tolerance)?.remove(0);
            log::info!("{} {method}: F1 {:.3}", family_name(family), best.mean_f1);
            out.push(MethodScore {
                method: method.into(),
                scenario: family_name(family).into(),
                mean_f1: best.mean_f1,
                std_f1: best.std_f1,
                config: best.config,
            });
        }
    }
    Ok(out)
}

fn synthetic_tables(scores: &[MethodScore]) -> Vec<Table> {
    let mut long = Table::new("synthetic_long", &["method", "scenario", "mean_f1", "std_f1", "config"]);
    for s in scores {
        long.push(vec![
            s.method.clone(),
            s.scenario.clone(),
            num(s.mean_f1),
            num(s.std_f1),
            serde_json::to_string(&s.config).unwrap_or_default(),
        ]);
    }
    let scenarios: Vec<&str> = SYNTHETIC_FAMILIES.iter().map(|&f| family_name(f)).collect();
    let mut cols = vec!["method"];
    cols.extend(&scenarios);
    let mut wide = Table::new("synthetic_f1", &cols);
    let mut methods: Vec<&str> = vec!["sword"];
    methods.extend(BASELINES);
    for m in methods {
        let mut row = vec![m.to_string()];
        for sc in &scenarios {
            let cell = scores.iter().find(|s| s.method == m && s.scenario == *sc);
            row.push(
                cell.map(|s| format!("{:.2}±{:.2}", s.mean_f1, s.std_f1))
                    .unwrap_or_default(),
            );
        }
        wide.push(row);
    }
    vec![wide, long]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardRow {
    /// `p2` or `p_out`.
    pub level: f64,
    pub method: String,
    pub mean_f1: f64,
    pub std_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardReport {
    pub rows: Vec<HardRow>,
    /// Configuration each method ran with.
    pub configs: Vec<(String, MethodConfig)>,
}

impl HardReport {
    pub fn f1(&self, method: &str, level: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.method == method && (r.level - level).abs() < 1e-9)
            .map(|r| r.mean_f1)
    }
}

/// Evaluates `methods` (fixed configs) and `tuned` grids (one threshold per
/// method pooled over every level) on each level's streams.
fn hard_benchmark(
    levels: &[f64],
    streams: &[Vec<PreparedStream>],
    fixed: &[(String, MethodConfig)],
    tuned: &[(String, Vec<MethodConfig>)],
    tolerance: u64,
) -> Result<HardReport> {
    let pooled: Vec<PreparedStream> = streams.iter().flatten().cloned().collect();
    let mut configs: Vec<(String, MethodConfig)> = fixed.to_vec();
    for (name, grid) in tuned {
        let best = tune_grid(grid, &pooled, tolerance)?.remove(0);
        configs.push((name.clone(), best.config));
    }
    let mut rows = Vec::new();
    for (level, level_streams) in levels.iter().zip(streams) {
        for (name, cfg) in &configs {
            let (mean, std) = mean_f1(&evaluate_fixed(cfg, level_streams, tolerance)?);
            rows.push(HardRow {
                level: *level,
                method: name.clone(),
                mean_f1: mean,
                std_f1: std,
            });
        }
    }
    Ok(HardReport { rows, configs })
}

/// Hard ER: `n=50`, `p1=0.1`, seven `p2` levels, 20 seeds. SWORD runs the
/// fixed config; baselines use one in-sample config pooled over all levels.
pub fn hard_er_suite(opts: &SuiteOptions) -> Result<HardReport> {
    let streams = HARD_ER_P2
        .iter()
        .map(|&p2| hard_er_streams(p2, opts, 20))
        .collect::<Result<Vec<_>>>()?;
    let fixed = vec![("sword".to_string(), MethodConfig::Sword(fixed_cfg()))];
    let burn_in = fixed_cfg().window.span();
    let mut tuned: Vec<(String, Vec<MethodConfig>)> = BASELINES
        .iter()
        .map(|m| (m.to_string(), baseline_grid(m, burn_in)))
        .collect();
    tuned.push(("sword_retuned".into(), vec![MethodConfig::Sword(fixed_cfg())]));
    hard_benchmark(&HARD_ER_P2, &streams, &fixed, &tuned, opts.tolerance)
}

/// Hard SBM: `n=60`, `p_in=0.3`, three blocks merge into two, seven `p_out`
/// levels, 20 seeds. Every method uses its SBM-family configuration, tuned
/// on the main SBM benchmark.
pub fn hard_sbm_suite(opts: &SuiteOptions) -> Result<HardReport> {
    let streams = HARD_SBM_P_OUT
        .iter()
        .map(|&p| hard_sbm_streams(p, opts, 20))
        .collect::<Result<Vec<_>>>()?;
    let sbm = synthetic_streams(ScenarioFamily::Sbm, opts, 10)?;
    let sword = appendix_b_config(ScenarioFamily::Sbm);
    let mut fixed = vec![("sword".to_string(), MethodConfig::Sword(sword))];
    for m in BASELINES {
        let best = tune_grid(&baseline_grid(m, sword.window.span()), &sbm, opts.tolerance)?.remove(0);
        fixed.push((m.to_string(), best.config));
    }
    hard_benchmark(&HARD_SBM_P_OUT, &streams, &fixed, &[], opts.tolerance)
}

fn hard_tables(name: &str, level: &str, report: &HardReport) -> Vec<Table> {
    let methods: Vec<&str> = report.configs.iter().map(|(m, _)| m.as_str()).collect();
    let mut cols = vec![level];
    cols.extend(&methods);
    let mut wide = Table::new(name, &cols);
    let mut levels: Vec<f64> = report.rows.iter().map(|r| r.level).collect();
    levels.dedup();
    for l in levels {
        let mut row = vec![format!("{l:.2}")];
        for m in &methods {
            row.push(report.f1(m, l).map(num).unwrap_or_default());
        }
        wide.push(row);
    }
    let mut long = Table::new(&format!("{name}_long"), &[level, "method", "mean_f1", "std_f1"]);
    for r in &report.rows {
        long.push(vec![
            format!("{:.2}", r.level),
            r.method.clone(),
            num(r.mean_f1),
            num(r.std_f1),
        ]);
    }
    let mut configs = Table::new(&format!("{name}_configs"), &["method", "config"]);
    for (m, c) in &report.configs {
        configs.push(vec![m.clone(), serde_json::to_string(c).unwrap_or_default()]);
    }
    vec![wide, long, configs]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArlCurve {
    pub method: String,
    pub delta_p: f64,
    pub report: ArlAddReport,
}

pub const ARL_T_NULL: u64 = 500;

/// Methods compared in the ARL/ADD sweep, with their fixed non-threshold
/// settings.
pub fn arl_methods() -> Vec<MethodConfig> {
    let burn_in = appendix_b_config(ScenarioFamily::Er).window.span();
    vec![
        MethodConfig::Sword(appendix_b_config(ScenarioFamily::Er)),
        MethodConfig::Scpd(CascadeConfig::new(CascadeStage::S0, 20, 0.0, 5)),
        MethodConfig::Laddos(CascadeConfig::new(CascadeStage::S0, 20, 0.0, 5)),
        MethodConfig::Lad(LadConfig::new(0.0, 5)),
        MethodConfig::Cusum(CusumConfig {
            kappa: 0.5,
            threshold: 0.0,
            burn_in,
            cooldown: 5,
        }),
        MethodConfig::Ewma(EwmaConfig {
            lambda: 0.3,
            width: 0.0,
            burn_in,
            cooldown: 5,
        }),
    ]
}

/// Thresholds at fixed quantiles of the pooled null scores.
pub fn null_quantile_thresholds(null: &[LabelledScores]) -> Vec<f64> {
    let mut all: Vec<f64> = null.iter().flat_map(|s| s.scores.iter().flatten().copied()).collect();
    all.sort_by(f64::total_cmp);
    if all.is_empty() {
        return vec![0.0, f64::INFINITY];
    }
    let last = all.len() - 1;
    let mut out: Vec<f64> = ARL_QUANTILES
        .iter()
        .map(|q| all[((q * last as f64).round() as usize).min(last)])
        .collect();
    out.dedup();
    if out.len() < 2 {
        out.push(f64::INFINITY);
    }
    out
}

/// ER `n=50` with `p = 0.1` under the null (length 500) and `0.1 -> 0.1 + dp`
/// at `t=50` (length 100), 20 seeds, for `dp` in {0.10, 0.05}.
pub fn arl_add_suite(opts: &SuiteOptions) -> Result<Vec<ArlCurve>> {
    let seeds = opts.seeds_or(20);
    let null_spec = |s| ScenarioSpec::stationary(ScenarioFamily::Er, 50, ARL_T_NULL, SegmentModel::Er { p: 0.1 }, s);
    let null = prepare_streams(null_spec, seeds, opts.seed, TAG_ARL_NULL, &opts.moments)?;
    let mut out = Vec::new();
    for dp in [0.10, 0.05] {
        let tag = TAG_ARL_CHANGE * 1000 + (dp * 100.0f64).round() as u64;
        let change = prepare_streams(
            |s| ScenarioSpec::hard_er(0.1 + dp, s),
            seeds,
            opts.seed,
            tag,
            &opts.moments,
        )?;
        for method in arl_methods() {
            let null_tracks = score_tracks(&method, &null)?;
            let change_tracks = score_tracks(&method, &change)?;
            let thresholds = null_quantile_thresholds(&null_tracks);
            out.push(ArlCurve {
                method: method.name().into(),
                delta_p: dp,
                report: measure_arl_add(&null_tracks, &change_tracks, &thresholds, ARL_T_NULL)?,
            });
        }
    }
    Ok(out)
}

/// ADD at the first operating point of each curve whose ARL0 reaches the
/// largest ARL0 every curve attains; `None` when the delay is unreported.
pub fn matched_add(curves: &[&ArlCurve]) -> Vec<(String, f64, Option<f64>)> {
    let target = curves
        .iter()
        .map(|c| c.report.rows.iter().map(|r| r.arl0).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min);
    curves
        .iter()
        .map(|c| {
            let row = c.report.at_arl(target);
            (c.method.clone(), row.map_or(0.0, |r| r.arl0), row.and_then(|r| r.add))
        })
        .collect()
}

fn arl_tables(curves: &[ArlCurve]) -> Vec<Table> {
    let mut t = Table::new(
        "arl_add",
        &[
            "method",
            "delta_p",
            "threshold",
            "arl0",
            "log10_arl0",
            "censored",
            "detection_rate",
            "add",
        ],
    );
    for c in curves {
        for r in &c.report.rows {
            t.push(vec![
                c.method.clone(),
                format!("{:.2}", c.delta_p),
                format!("{:e}", r.threshold),
                num(r.arl0),
                num(r.arl0.log10()),
                num(r.censored),
                num(r.detection_rate),
                r.add.map(num).unwrap_or_default(),
            ]);
        }
    }
    let mut m = Table::new("arl_add_matched", &["delta_p", "method", "arl0", "add"]);
    for dp in [0.10, 0.05] {
        let group: Vec<&ArlCurve> = curves.iter().filter(|c| (c.delta_p - dp).abs() < 1e-9).collect();
        for (method, arl0, add) in matched_add(&group) {
            m.push(vec![
                format!("{dp:.2}"),
                method,
                num(arl0),
                add.map(num).unwrap_or_else(|| "inf".into()),
            ]);
        }
    }
    vec![t, m]
}

/// SCPD configuration used by the bin-width sweep and the cascade.
pub fn scaffold_config() -> CascadeConfig {
    CascadeConfig::new(CascadeStage::S0, 20, 0.0, 5)
}

/// Hard ER at `dp = 0.10`, S0 scaffold, F1 per bin count with the
/// threshold re-tuned per cell.
pub fn bin_sweep_suite(opts: &SuiteOptions) -> Result<Vec<crate::scpd::BinSweepRow>> {
    let streams = hard_er_streams(0.2, opts, 20)?;
    let labelled: Vec<LabelledMoments> = streams.iter().map(PreparedStream::labelled_moments).collect();
    bin_sweep(&labelled, &scaffold_config(), &SWEEP_BINS, opts.tolerance)
}

fn bin_sweep_tables(rows: &[crate::scpd::BinSweepRow]) -> Vec<Table> {
    let mut t = Table::new("bin_sweep", &["bins", "threshold", "mean_f1", "std_f1"]);
    for r in rows {
        t.push(vec![
            r.bins.to_string(),
            format!("{:e}", r.threshold),
            num(r.mean_f1),
            num(r.std_f1),
        ]);
    }
    vec![t]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeRow {
    pub stage: CascadeStage,
    pub dataset: String,
    pub seed: usize,
    pub f1: f64,
}

/// Every stage on hard ER (`dp = 0.10`) and the main ER benchmark, with
/// moment order, windows and cooldown held fixed and the threshold tuned
/// per stage over the dataset's seeds.
pub fn cascade_suite(opts: &SuiteOptions) -> Result<Vec<CascadeRow>> {
    let datasets = [
        ("hard_er", hard_er_streams(0.2, opts, 20)?),
        ("er", synthetic_streams(ScenarioFamily::Er, opts, 10)?),
    ];
    let mut out = Vec::new();
    for (name, streams) in &datasets {
        for stage in CascadeStage::ALL {
            let cfg = MethodConfig::Scpd(CascadeConfig {
                stage,
                window: WindowSpec::symmetric(3),
                ..scaffold_config()
            });
            let tracks = score_tracks(&cfg, streams)?;
            let tuned = tune_threshold(&tracks, cfg.cooldown(), opts.tolerance);
            for (seed, t) in tracks.iter().enumerate() {
                out.push(CascadeRow {
                    stage,
                    dataset: name.to_string(),
                    seed,
                    f1: t.evaluate(tuned.threshold, cfg.cooldown(), opts.tolerance).f1,
                });
            }
        }
    }
    Ok(out)
}

fn cascade_tables(rows: &[CascadeRow]) -> Vec<Table> {
    let mut t = Table::new("cascade", &["stage", "dataset", "seed", "f1"]);
    for r in rows {
        t.push(vec![
            r.stage.to_string(),
            r.dataset.clone(),
            r.seed.to_string(),
            num(r.f1),
        ]);
    }
    vec![t]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSweepReport {
    pub exact: Vec<KSweepRow>,
    pub estimated: Vec<KSweepRow>,
}

/// `k = 1..=30` (capped at the moment order) on hard ER (`dp = 0.10`) with the fixed config, threshold
/// re-tuned per `k` and stream, on exact and estimated moments.
pub fn k_sweep_suite(opts: &SuiteOptions) -> Result<KSweepReport> {
    let top = opts.moments.order.min(30);
    if top < 30 {
        log::warn!("k sweep capped at the moment order {top}");
    }
    let ks: Vec<usize> = (1..=top).collect();
    let exact_opts = SuiteOptions {
        moments: MomentOptions {
            exact: true,
            ..opts.moments
        },
        ..*opts
    };
    let run = |o: &SuiteOptions| -> Result<Vec<KSweepRow>> {
        let streams = hard_er_streams(0.2, o, 20)?;
        let labelled: Vec<LabelledMoments> = streams.iter().map(PreparedStream::labelled_moments).collect();
        k_sweep(&labelled, &fixed_cfg(), &ks, o.tolerance)
    };
    Ok(KSweepReport {
        exact: run(&exact_opts)?,
        estimated: if opts.moments.exact { Vec::new() } else { run(opts)? },
    })
}

fn k_sweep_tables(r: &KSweepReport) -> Vec<Table> {
    let mut t = Table::new("k_sweep", &["k", "moments", "mean_f1", "std_f1"]);
    for (label, rows) in [("exact", &r.exact), ("estimated", &r.estimated)] {
        for row in rows {
            t.push(vec![row.k.to_string(), label.into(), num(row.mean_f1), num(row.std_f1)]);
        }
    }
    vec![t]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: String,
    pub dataset: String,
    pub best_f1: f64,
    pub config: MethodConfig,
}

fn ablation_datasets(opts: &SuiteOptions) -> Result<Vec<(String, Vec<PreparedStream>)>> {
    let mut out = vec![("hard_er".to_string(), hard_er_streams(0.2, opts, 20)?)];
    for family in SYNTHETIC_FAMILIES {
        out.push((family_name(family).into(), synthetic_streams(family, opts, 10)?));
    }
    Ok(out)
}

fn sword_grid(windows: &[WindowSpec], modes: &[DistanceMode]) -> Vec<MethodConfig> {
    let mut out = Vec::new();
    for &window in windows {
        for &mode in modes {
            for k in [2, 3, 4] {
                for &c in &COOLDOWNS {
                    out.push(MethodConfig::Sword(DetectorConfig::new(0.0, window, k, c, mode)));
                }
            }
        }
    }
    out
}

fn best_per_variant(variants: &[(String, Vec<MethodConfig>)], opts: &SuiteOptions) -> Result<Vec<AblationRow>> {
    let mut out = Vec::new();
    for (dataset, streams) in ablation_datasets(opts)? {
        for (variant, grid) in variants {
            let best = tune_grid(grid, &streams, opts.tolerance)?.remove(0);
            out.push(AblationRow {
                variant: variant.clone(),
                dataset: dataset.clone(),
                best_f1: best.mean_f1,
                config: best.config,
            });
        }
    }
    Ok(out)
}

/// Best tuned F1 of each distance mode.
pub fn distance_mode_suite(opts: &SuiteOptions) -> Result<Vec<AblationRow>> {
    let windows: Vec<WindowSpec> = [2, 3, 4, 7].map(WindowSpec::symmetric).to_vec();
    let variants: Vec<(String, Vec<MethodConfig>)> = [
        DistanceMode::MeanPairwise,
        DistanceMode::Centroid,
        DistanceMode::WeightedGamma,
    ]
    .iter()
    .map(|&m| (m.to_string(), sword_grid(&windows, &[m])))
    .collect();
    best_per_variant(&variants, opts)
}

/// Best tuned F1 of symmetric, asymmetric and exponentially weighted
/// windows.
pub fn window_suite(opts: &SuiteOptions) -> Result<Vec<AblationRow>> {
    let modes = [
        DistanceMode::MeanPairwise,
        DistanceMode::Centroid,
        DistanceMode::WeightedGamma,
    ];
    let symmetric: Vec<WindowSpec> = [2, 3, 4, 7].map(WindowSpec::symmetric).to_vec();
    let asymmetric: Vec<WindowSpec> = [(2, 3), (2, 5), (2, 7), (3, 7)]
        .map(|(w, r)| WindowSpec::asymmetric(w, r))
        .to_vec();
    let exponential: Vec<WindowSpec> = symmetric
        .iter()
        .flat_map(|w| [0.5, 0.7, 0.9].map(|g| w.exponential(g)))
        .collect();
    let variants = vec![
        ("symmetric".to_string(), sword_grid(&symmetric, &modes)),
        ("asymmetric".to_string(), sword_grid(&asymmetric, &modes)),
        ("exponential".to_string(), sword_grid(&exponential, &modes)),
    ];
    best_per_variant(&variants, opts)
}

fn ablation_tables(name: &str, rows: &[AblationRow]) -> Vec<Table> {
    let mut t = Table::new(name, &["variant", "dataset", "best_f1", "config"]);
    for r in rows {
        t.push(vec![
            r.variant.clone(),
            r.dataset.clone(),
            num(r.best_f1),
            serde_json::to_string(&r.config).unwrap_or_default(),
        ]);
    }
    vec![t]
}

/// A grid over one method: `base` is a method config object (with its
/// `method` tag) and every axis overrides one key, dotted for nested keys
/// (`window.test`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub scenario: String,
    pub seeds: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: u64,
    #[serde(default = "default_top")]
    pub top: usize,
    #[serde(default)]
    pub moments: MomentOptions,
    pub base: serde_json::Value,
    #[serde(default)]
    pub axes: BTreeMap<String, Vec<serde_json::Value>>,
}

fn default_tolerance() -> u64 {
    5
}

fn default_top() -> usize {
    50
}

fn set_path(target: &mut serde_json::Value, path: &str, value: serde_json::Value) -> Result<()> {
    let mut cur = target;
    let mut parts = path.split('.').peekable();
    while let Some(part) = parts.next() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("grid axis {path:?} does not address an object")))?;
        if parts.peek().is_none() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj
            .entry(part.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    Ok(())
}

impl GridSpec {
    /// Cartesian product of the axes applied to the base config.
    pub fn configs(&self) -> Result<Vec<MethodConfig>> {
        let mut objects = vec![self.base.clone()];
        for (path, values) in &self.axes {
            if values.is_empty() {
                return Err(Error::Config(format!("grid axis {path:?} has no values")));
            }
            let mut next = Vec::with_capacity(objects.len() * values.len());
            for obj in &objects {
                for v in values {
                    let mut o = obj.clone();
                    set_path(&mut o, path, v.clone())?;
                    next.push(o);
                }
            }
            objects = next;
        }
        objects
            .into_iter()
            .map(|o| serde_json::from_value(o).map_err(|e| Error::Config(format!("grid config: {e}"))))
            .collect()
    }
}

/// Generates the grid's streams and ranks every config by mean F1.
pub fn run_grid(spec: &GridSpec, root_seed: u64) -> Result<Vec<GridRow<MethodConfig>>> {
    let configs = spec.configs()?;
    if configs.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    let opts = SuiteOptions {
        seed: root_seed,
        seeds: Some(spec.seeds),
        moments: spec.moments,
        tolerance: spec.tolerance,
    };
    let streams = scenario_streams(&spec.scenario, &opts)?;
    let mut tracks: HashMap<String, Vec<LabelledScores>> = HashMap::new();
    for c in &configs {
        let key = c.score_key();
        if let std::collections::hash_map::Entry::Vacant(e) = tracks.entry(key) {
            e.insert(score_tracks(c, &streams)?);
        }
    }
    let tolerance = spec.tolerance;
    grid_search(
        &configs,
        spec.seeds,
        spec.top,
        |c, seed| {
            let track = &tracks[&c.score_key()][seed];
            match c.threshold() {
                Some(theta) => Ok(track.evaluate(theta, c.cooldown(), tolerance)),
                None => {
                    let out = c.detect(&streams[seed].data)?;
                    Ok(crate::eval::match_detections(
                        &track.change_points,
                        &out.detections,
                        tolerance,
                    ))
                }
            }
        },
        MethodConfig::span,
    )
}

/// Streams for a scenario name: a synthetic preset, `hard_er:<p2>` or
/// `hard_sbm:<p_out>`.
pub fn scenario_streams(name: &str, opts: &SuiteOptions) -> Result<Vec<PreparedStream>> {
    if let Some((family, level)) = name.split_once(':') {
        let level: f64 = level
            .parse()
            .map_err(|_| Error::Config(format!("bad scenario level in {name:?}")))?;
        return match family {
            "hard_er" => hard_er_streams(level, opts, 20),
            "hard_sbm" => hard_sbm_streams(level, opts, 20),
            _ => Err(Error::Config(format!("unknown scenario {name:?}"))),
        };
    }
    let family = SYNTHETIC_FAMILIES
        .iter()
        .chain(&[ScenarioFamily::HardEr, ScenarioFamily::HardSbm])
        .copied()
        .find(|&f| family_name(f) == name)
        .ok_or_else(|| Error::Config(format!("unknown scenario {name:?}")))?;
    prepare_streams(
        family_spec(family),
        opts.seeds_or(10),
        opts.seed,
        family_tag(family),
        &opts.moments,
    )
}

/// A single-method ARL/ADD run on ER streams: `runs` null streams of length
/// `t_null` at `p`, and `runs` change streams of length `t_change` switching
/// to `p + delta_p` at `t_change / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArlSpec {
    pub method: MethodConfig,
    #[serde(default = "default_arl_n")]
    pub n: usize,
    #[serde(default = "default_arl_p")]
    pub p: f64,
    #[serde(default = "default_arl_dp")]
    pub delta_p: f64,
    #[serde(default = "default_t_null")]
    pub t_null: u64,
    #[serde(default = "default_t_change")]
    pub t_change: u64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    /// Explicit thresholds; null-score quantiles when absent.
    #[serde(default)]
    pub thresholds: Option<Vec<f64>>,
    #[serde(default)]
    pub moments: MomentOptions,
}

fn default_arl_n() -> usize {
    50
}

fn default_arl_p() -> f64 {
    0.1
}

fn default_arl_dp() -> f64 {
    0.1
}

fn default_t_null() -> u64 {
    ARL_T_NULL
}

fn default_t_change() -> u64 {
    100
}

fn default_runs() -> usize {
    20
}

pub fn run_arl(spec: &ArlSpec, root_seed: u64) -> Result<ArlAddReport> {
    if spec.t_change < 2 {
        return Err(Error::Config("t_change must be at least 2".into()));
    }
    let (n, p, dp) = (spec.n, spec.p, spec.delta_p);
    let null_spec = |s| ScenarioSpec::stationary(ScenarioFamily::Er, n, spec.t_null, SegmentModel::Er { p }, s);
    let change_spec = |s| ScenarioSpec {
        family: ScenarioFamily::HardEr,
        n,
        length: spec.t_change,
        change_points: vec![spec.t_change / 2],
        segments: vec![SegmentModel::Er { p }, SegmentModel::Er { p: p + dp }],
        seed: s,
    };
    let null = prepare_streams(null_spec, spec.runs, root_seed, TAG_ARL_NULL, &spec.moments)?;
    let change = prepare_streams(change_spec, spec.runs, root_seed, TAG_ARL_CHANGE, &spec.moments)?;
    let null_tracks = score_tracks(&spec.method, &null)?;
    let change_tracks = score_tracks(&spec.method, &change)?;
    let thresholds = match &spec.thresholds {
        Some(t) => t.clone(),
        None => null_quantile_thresholds(&null_tracks),
    };
    measure_arl_add(&null_tracks, &change_tracks, &thresholds, spec.t_null)
}
