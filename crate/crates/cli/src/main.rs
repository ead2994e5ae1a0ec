//! `sword`: generate streams, estimate moments, detect change points and run
//! the benchmark suites. Every command writes a `manifest.json` next to its
//! outputs.

mod manifest;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use manifest::{write_atomic, Recorder};
use sword_core::baselines::{CusumConfig, EwmaConfig, LadConfig};
use sword_core::detector::{write_detections_json, write_score_csv, DetectorConfig};
use sword_core::eval::{k_sweep, match_detections};
use sword_core::graph::{load_snapshot_stream, write_snapshot_stream, DEFAULT_DENSE_LIMIT};
use sword_core::kpm::{
    estimate_stream, exact_stream, read_moment_cache, write_moment_cache, MomentSeries, ProbeSet, ProbeSharing,
    DEFAULT_ORDER, DEFAULT_PROBES,
};
use sword_core::methods::{InputKind, MethodConfig, StreamData};
use sword_core::scpd::{CascadeConfig, CascadeStage};
use sword_core::suites::{
    appendix_b_config, fixed_cfg, run_arl, run_grid, run_suite, scaffold_config, scenario_streams, ArlSpec, GridSpec,
    MomentOptions, PreparedStream, SuiteOptions, SUITES,
};
use sword_core::synth::{generate_sequence, read_ground_truth, write_ground_truth, ScenarioFamily, ScenarioSpec};

#[derive(Parser, Debug)]
#[command(name = "sword", version, about = "Spectral change-point detection on graph streams")]
struct Cli {
    /// Root seed for every random draw of the invocation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic snapshot stream and its ground truth.
    Generate(GenerateArgs),
    /// Estimate (or compute exactly) Chebyshev moments of a snapshot stream.
    Moments(MomentsArgs),
    /// Score a stream with one method and emit detections.
    Detect(DetectArgs),
    /// Run a named benchmark suite.
    Bench(BenchArgs),
    /// Grid search over one method's hyperparameters.
    Sweep(ConfigRun),
    /// Average run length and detection delay over a threshold sweep.
    Arl(ConfigRun),
    /// F1 as a function of the moment order k.
    Ksweep(KsweepArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Preset name (er, sbm, ba, ws, multi_cp, hard_er, hard_sbm), optionally
    /// with a level as in `hard_er:0.15`.
    #[arg(long, conflicts_with = "config")]
    scenario: Option<String>,
    /// Scenario TOML; its seed is replaced by `--seed`.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
struct MomentArgs {
    /// Moment order K.
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    order: usize,
    /// Probe count R.
    #[arg(long, default_value_t = DEFAULT_PROBES)]
    probes: usize,
    /// Reuse one probe set for every snapshot.
    #[arg(long)]
    shared: bool,
    /// Dense eigendecomposition instead of probes.
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = DEFAULT_DENSE_LIMIT)]
    dense_limit: usize,
}

impl MomentArgs {
    fn sharing(&self) -> ProbeSharing {
        if self.shared {
            ProbeSharing::Shared
        } else {
            ProbeSharing::Fresh
        }
    }

    fn options(&self) -> MomentOptions {
        MomentOptions {
            order: self.order,
            probes: self.probes,
            exact: self.exact,
            sharing: self.sharing(),
        }
    }
}

#[derive(Args, Debug)]
struct MomentsArgs {
    /// Snapshot stream (JSON Lines).
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    moments: MomentArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DetectArgs {
    /// Method TOML with a `method` key.
    #[arg(long, conflicts_with = "method")]
    config: Option<PathBuf>,
    /// Method with its default settings: sword, scpd, laddos, cusum, ewma, lad.
    #[arg(long)]
    method: Option<String>,
    /// Cascade stage for scpd and laddos.
    #[arg(long)]
    stage: Option<CascadeStage>,
    /// Overrides the alarm threshold (`inf` disables alarms).
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    cooldown: Option<usize>,
    /// Moment cache CSV.
    #[arg(long)]
    moments: Option<PathBuf>,
    /// Snapshot stream; moments are computed from it when no cache is given.
    #[arg(long)]
    snapshots: Option<PathBuf>,
    /// Ground truth JSON; adds `evaluation.json`.
    #[arg(long)]
    ground_truth: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    tolerance: u64,
    #[command(flatten)]
    moment_args: MomentArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    suite: String,
    /// Seeds per scenario; defaults to each suite's own count.
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long, default_value_t = 5)]
    tolerance: u64,
    #[command(flatten)]
    moments: MomentArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ConfigRun {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct KsweepArgs {
    /// Scenario name, e.g. `hard_er:0.2`.
    #[arg(long, default_value = "hard_er:0.2")]
    scenario: String,
    /// Detector TOML (SWORD fields only); the fixed hard-ER config otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Inclusive range `a-b` or a comma list.
    #[arg(long, default_value = "1-30")]
    ks: String,
    #[arg(long, default_value_t = 20)]
    seeds: usize,
    #[arg(long, default_value_t = 5)]
    tolerance: u64,
    #[command(flatten)]
    moments: MomentArgs,
    #[arg(long)]
    out: PathBuf,
}

fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Preset name with an optional level: `hard_er:0.15`, `hard_sbm:0.1`.
fn scenario_from_name(name: &str, seed: u64) -> Result<ScenarioSpec> {
    if let Some((family, level)) = name.split_once(':') {
        let level: f64 = level.parse().with_context(|| format!("bad level in {name:?}"))?;
        return Ok(match family {
            "hard_er" | "hard-er" => ScenarioSpec::hard_er(level, seed),
            "hard_sbm" | "hard-sbm" => ScenarioSpec::hard_sbm(level, seed),
            _ => bail!("only hard_er and hard_sbm take a level, got {name:?}"),
        });
    }
    Ok(ScenarioSpec::preset(name, seed)?)
}

fn cmd_generate(args: GenerateArgs, seed: u64) -> Result<()> {
    let spec = match (&args.scenario, &args.config) {
        (Some(name), None) => scenario_from_name(name, seed)?,
        (None, Some(path)) => read_toml::<ScenarioSpec>(path)?.with_seed(seed),
        _ => bail!("pass exactly one of --scenario or --config"),
    };
    let stream = generate_sequence(&spec)?;
    create_dir(&args.out)?;
    let mut rec = Recorder::start("generate", seed, &spec)?;
    if let Some(p) = &args.config {
        rec.input(p);
    }
    let snaps = args.out.join("snapshots.jsonl");
    let truth = args.out.join("ground_truth.json");
    write_snapshot_stream(&snaps, &stream.snapshots)?;
    write_ground_truth(&truth, &stream.change_points)?;
    rec.output(&snaps);
    rec.output(&truth);
    rec.finish(&args.out)?;
    println!(
        "{} snapshots, change points {:?}",
        stream.snapshots.len(),
        stream.change_points
    );
    Ok(())
}

fn compute_moments(snapshots: &[sword_core::graph::GraphSnapshot], m: &MomentArgs, seed: u64) -> Result<MomentSeries> {
    let vectors = if m.exact {
        exact_stream(snapshots, m.order, m.dense_limit)?
    } else {
        let probes = ProbeSet {
            sharing: m.sharing(),
            ..ProbeSet::new(m.probes, seed)
        };
        estimate_stream(snapshots, m.order, &probes)?
    };
    Ok(MomentSeries::new(snapshots.iter().map(|g| g.t()).collect(), vectors)?)
}

fn cmd_moments(args: MomentsArgs, seed: u64) -> Result<()> {
    let loaded = load_snapshot_stream(&args.input)?;
    let series = compute_moments(&loaded.snapshots, &args.moments, seed)?;
    create_dir(&args.out)?;
    let mut rec = Recorder::start("moments", seed, &args.moments)?;
    rec.input(&args.input);
    let path = args.out.join("moments.csv");
    write_moment_cache(&path, &series)?;
    rec.output(&path);
    rec.finish(&args.out)?;
    println!("{} moment vectors of order {}", series.len(), series.order());
    Ok(())
}

/// Default settings per method name; thresholds are starting points only.
fn default_method(name: &str, stage: Option<CascadeStage>) -> Result<MethodConfig> {
    let cascade = || CascadeConfig {
        stage: stage.unwrap_or(CascadeStage::S0),
        threshold: 0.05,
        ..scaffold_config()
    };
    let burn_in = appendix_b_config(ScenarioFamily::Er).window.span();
    Ok(match name {
        "sword" => MethodConfig::Sword(appendix_b_config(ScenarioFamily::Er)),
        "scpd" | "scpd-stage" => MethodConfig::Scpd(cascade()),
        "laddos" => MethodConfig::Laddos(cascade()),
        "cusum" => MethodConfig::Cusum(CusumConfig {
            kappa: 0.5,
            threshold: 5.0,
            burn_in,
            cooldown: 5,
        }),
        "ewma" => MethodConfig::Ewma(EwmaConfig {
            lambda: 0.3,
            width: 3.0,
            burn_in,
            cooldown: 5,
        }),
        "lad" => MethodConfig::Lad(LadConfig::new(0.05, 5)),
        other => bail!("unknown method {other:?} (expected sword, scpd, laddos, cusum, ewma, lad)"),
    })
}

fn cmd_detect(args: DetectArgs, seed: u64) -> Result<()> {
    let mut method = match (&args.config, &args.method) {
        (Some(path), None) => read_toml::<MethodConfig>(path)?,
        (None, Some(name)) => default_method(name, args.stage)?,
        _ => bail!("pass exactly one of --config or --method"),
    };
    if let Some(stage) = args.stage {
        match &mut method {
            MethodConfig::Scpd(c) | MethodConfig::Laddos(c) => c.stage = stage,
            _ => bail!("--stage applies to scpd and laddos only"),
        }
    }
    if let Some(t) = args.threshold {
        method = method.with_threshold(t);
    }
    if let Some(c) = args.cooldown {
        method = method.with_cooldown(c);
    }
    let mut rec = Recorder::start("detect", seed, method)?;
    let data = match (&args.moments, &args.snapshots) {
        (Some(cache), None) => {
            if method.input() != InputKind::Moments {
                bail!("{} needs --snapshots", method.name());
            }
            rec.input(cache);
            StreamData::from_moments(read_moment_cache(cache)?)
        }
        (cache, Some(snaps)) => {
            rec.input(snaps);
            let loaded = load_snapshot_stream(snaps)?;
            let moments = match cache {
                Some(c) => {
                    rec.input(c);
                    Some(read_moment_cache(c)?)
                }
                None if method.input() == InputKind::Moments => {
                    Some(compute_moments(&loaded.snapshots, &args.moment_args, seed)?)
                }
                None => None,
            };
            StreamData::from_snapshots(loaded.snapshots, moments)
        }
        (None, None) => bail!("pass --moments or --snapshots"),
    };
    let out = method.detect(&data)?;
    create_dir(&args.out)?;
    let scores = args.out.join("scores.csv");
    let detections = args.out.join("detections.json");
    write_score_csv(&scores, &out)?;
    write_detections_json(&detections, &out.detections)?;
    rec.output(&scores);
    rec.output(&detections);
    if let Some(truth_path) = &args.ground_truth {
        rec.input(truth_path);
        let truth = read_ground_truth(truth_path)?;
        let report = match_detections(&truth, &out.detections, args.tolerance);
        let path = args.out.join("evaluation.json");
        write_atomic(&path, serde_json::to_string_pretty(&report)?.as_bytes())?;
        rec.output(&path);
        println!(
            "F1 {:.4} (precision {:.4}, recall {:.4})",
            report.f1, report.precision, report.recall
        );
    }
    rec.finish(&args.out)?;
    println!("detections {:?}", out.detections);
    Ok(())
}

fn cmd_bench(args: BenchArgs, seed: u64) -> Result<()> {
    if !SUITES.contains(&args.suite.as_str()) {
        bail!("unknown suite {:?}; available: {}", args.suite, SUITES.join(", "));
    }
    let opts = SuiteOptions {
        seed,
        seeds: args.seeds,
        moments: args.moments.options(),
        tolerance: args.tolerance,
    };
    let mut rec = Recorder::start(
        "bench",
        seed,
        serde_json::json!({ "suite": args.suite, "options": opts }),
    )?;
    let report = run_suite(&args.suite, &opts)?;
    create_dir(&args.out)?;
    for table in &report.tables {
        rec.output(table.write_csv(&args.out)?);
        println!("{}: {} rows", table.name, table.rows.len());
    }
    rec.finish(&args.out)?;
    Ok(())
}

fn json_cell(v: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string(v)?)
}

fn cmd_sweep(args: ConfigRun, seed: u64) -> Result<()> {
    let spec: GridSpec = read_toml(&args.config)?;
    let mut rec = Recorder::start("sweep", seed, &spec)?;
    rec.input(&args.config);
    let rows = run_grid(&spec, seed)?;
    create_dir(&args.out)?;
    let mut table = sword_core::suites::Table::new(
        "grid",
        &["rank", "mean_f1", "std_f1", "false_positives", "span", "config"],
    );
    for (i, r) in rows.iter().enumerate() {
        table.push(vec![
            (i + 1).to_string(),
            format!("{:.4}", r.mean_f1),
            format!("{:.4}", r.std_f1),
            r.false_positives.to_string(),
            r.span.to_string(),
            json_cell(&r.config)?,
        ]);
    }
    rec.output(table.write_csv(&args.out)?);
    rec.finish(&args.out)?;
    if let Some(best) = rows.first() {
        println!("best F1 {:.4}: {}", best.mean_f1, json_cell(&best.config)?);
    }
    Ok(())
}

fn cmd_arl(args: ConfigRun, seed: u64) -> Result<()> {
    let spec: ArlSpec = read_toml(&args.config)?;
    let mut rec = Recorder::start("arl", seed, &spec)?;
    rec.input(&args.config);
    let report = run_arl(&spec, seed)?;
    create_dir(&args.out)?;
    let mut table = sword_core::suites::Table::new("arl", &["threshold", "arl0", "censored", "detection_rate", "add"]);
    for r in &report.rows {
        table.push(vec![
            format!("{:e}", r.threshold),
            format!("{:.4}", r.arl0),
            format!("{:.4}", r.censored),
            format!("{:.4}", r.detection_rate),
            r.add.map(|a| format!("{a:.4}")).unwrap_or_default(),
        ]);
    }
    rec.output(table.write_csv(&args.out)?);
    rec.finish(&args.out)?;
    println!("{} operating points", report.rows.len());
    Ok(())
}

fn parse_ks(s: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = s.split_once('-') {
        let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
        if a > b {
            bail!("empty k range {s:?}");
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|k| Ok(k.trim().parse()?)).collect()
}

fn cmd_ksweep(args: KsweepArgs, seed: u64) -> Result<()> {
    let base: DetectorConfig = match &args.config {
        Some(p) => read_toml(p)?,
        None => fixed_cfg(),
    };
    let ks = parse_ks(&args.ks)?;
    let opts = SuiteOptions {
        seed,
        seeds: Some(args.seeds),
        moments: args.moments.options(),
        tolerance: args.tolerance,
    };
    let mut rec = Recorder::start(
        "ksweep",
        seed,
        serde_json::json!({ "scenario": args.scenario, "base": base, "ks": ks, "options": opts }),
    )?;
    if let Some(p) = &args.config {
        rec.input(p);
    }
    let streams = scenario_streams(&args.scenario, &opts)?;
    let labelled: Vec<_> = streams.iter().map(PreparedStream::labelled_moments).collect();
    let rows = k_sweep(&labelled, &base, &ks, args.tolerance)?;
    create_dir(&args.out)?;
    let mut table = sword_core::suites::Table::new("k_sweep", &["k", "mean_f1", "std_f1", "thresholds"]);
    for r in &rows {
        table.push(vec![
            r.k.to_string(),
            format!("{:.4}", r.mean_f1),
            format!("{:.4}", r.std_f1),
            json_cell(&r.thresholds)?,
        ]);
    }
    rec.output(table.write_csv(&args.out)?);
    rec.finish(&args.out)?;
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Generate(a) => cmd_generate(a, cli.seed),
        Command::Moments(a) => cmd_moments(a, cli.seed),
        Command::Detect(a) => cmd_detect(a, cli.seed),
        Command::Bench(a) => cmd_bench(a, cli.seed),
        Command::Sweep(a) => cmd_sweep(a, cli.seed),
        Command::Arl(a) => cmd_arl(a, cli.seed),
        Command::Ksweep(a) => cmd_ksweep(a, cli.seed),
    }
}
