//! SVD + cosine scoring scaffold for the cascading ablation from the
//! SCPD pipeline to SWORD.
//!
//! Every stage consumes the same per-snapshot moment vectors and changes one
//! axis relative to its predecessor:
//!
//! | stage    | representation        | context              | score                     |
//! |----------|-----------------------|----------------------|---------------------------|
//! | `S0`     | Jackson-damped, binned | top singular vector | `max(0, Z_t - Z_{t-1})`   |
//! | `S1`     | as S0                 | context mean         | as S0                     |
//! | `S2`     | as S0                 | context mean         | `Z_t`                     |
//! | `S3`     | as S0                 | two windows          | `1 - cos(test, ref)`      |
//! | `S3half` | as S0                 | two windows          | L1 of L2-normalized means |
//! | `S4`     | as S0                 | two windows          | L1 of raw means           |
//! | `S5`     | raw moments           | two windows          | L1 of raw means (SWORD)   |
//!
//! `Z_t = max(Z_short, Z_long)` where each `Z = 1 - cos(h_t, u)` compares the
//! current vector with a trailing context of the previous `short` or `long`
//! vectors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detector::window::{statistic, weighted_mean};
use crate::detector::{DistanceMode, ScoreSeries, WindowSpec};
use crate::eval::{tune_threshold, LabelledMoments, LabelledScores};
use crate::kpm::{dos_histogram, jackson_damp, l1_distance, BinCount, MomentSeries, MomentVector};
use crate::linalg::{jacobi_eigen, SymMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CascadeStage {
    S0,
    S1,
    S2,
    S3,
    S3half,
    S4,
    S5,
}

impl CascadeStage {
    pub const ALL: [CascadeStage; 7] = [
        CascadeStage::S0,
        CascadeStage::S1,
        CascadeStage::S2,
        CascadeStage::S3,
        CascadeStage::S3half,
        CascadeStage::S4,
        CascadeStage::S5,
    ];

    fn damped(self) -> bool {
        self != CascadeStage::S5
    }

    fn two_window(self) -> bool {
        self >= CascadeStage::S3
    }
}

impl fmt::Display for CascadeStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CascadeStage::S0 => "s0",
            CascadeStage::S1 => "s1",
            CascadeStage::S2 => "s2",
            CascadeStage::S3 => "s3",
            CascadeStage::S3half => "s3half",
            CascadeStage::S4 => "s4",
            CascadeStage::S5 => "s5",
        };
        f.write_str(s)
    }
}

impl FromStr for CascadeStage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CascadeStage::ALL
            .into_iter()
            .find(|stage| stage.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown cascade stage {s:?} (expected s0..s5 or s3half)")))
    }
}

/// Order in which the short/long first differences are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DifferenceOrder {
    /// SCPD: take the max over contexts, then difference.
    MaxThenDifference,
    /// LADdos: clamp each context's difference, then take the max.
    ClampThenMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeConfig {
    pub stage: CascadeStage,
    #[serde(default = "default_bins")]
    pub bins: BinCount,
    /// Moment order `k` taken from each vector.
    pub order: usize,
    /// Short and long SVD context lengths (stages S0-S2).
    #[serde(default = "default_context")]
    pub context: (usize, usize),
    /// Test/reference windows (stages S3-S5).
    #[serde(default = "default_window")]
    pub window: WindowSpec,
    pub threshold: f64,
    pub cooldown: usize,
}

fn default_bins() -> BinCount {
    BinCount::Infinite
}

fn default_context() -> (usize, usize) {
    (5, 10)
}

fn default_window() -> WindowSpec {
    WindowSpec::symmetric(3)
}

impl CascadeConfig {
    pub fn new(stage: CascadeStage, order: usize, threshold: f64, cooldown: usize) -> Self {
        Self {
            stage,
            bins: default_bins(),
            order,
            context: default_context(),
            window: default_window(),
            threshold,
            cooldown,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::Config("cascade order must be >= 1".into()));
        }
        if self.cooldown == 0 {
            return Err(Error::Config("cooldown must be >= 1".into()));
        }
        let (short, long) = self.context;
        if short == 0 || long == 0 {
            return Err(Error::Config("context lengths must be >= 1".into()));
        }
        if let BinCount::Finite(b) = self.bins {
            if b < 2 {
                return Err(Error::Config(format!("bin count {b} < 2")));
            }
        }
        self.window.validate()
    }
}

/// `1 - cos(a, b)`, or 0 when either vector is zero.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    1.0 - dot / (na * nb)
}

fn l2_normalized(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return v.to_vec();
    }
    v.iter().map(|x| x / norm).collect()
}

/// Per-snapshot vectors `h_t` the stage scores: the first `order` moments,
/// Jackson-damped except at S5, then binned unless `bins` is infinite.
pub fn stage_representation(moments: &MomentSeries, cfg: &CascadeConfig) -> Result<Vec<Vec<f64>>> {
    moments
        .moments()
        .iter()
        .map(|m| {
            let mut v = m.truncated(cfg.order)?;
            if cfg.stage.damped() && !v.is_damped() {
                v = jackson_damp(&v);
            }
            Ok(dos_histogram(&v, cfg.bins)?.values)
        })
        .collect()
}

/// Top left singular vector of the matrix whose columns are `context`,
/// sign-fixed to point along the context mean.
pub fn top_singular_vector(context: &[&[f64]]) -> Vec<f64> {
    let l = context.len();
    let d = context.first().map_or(0, |c| c.len());
    let mut gram = SymMatrix::zeros(l);
    for i in 0..l {
        for j in 0..=i {
            let g: f64 = context[i].iter().zip(context[j]).map(|(a, b)| a * b).sum();
            gram.set_sym(i, j, g);
        }
    }
    let (_, vectors) = jacobi_eigen(&gram);
    let v = &vectors[0];
    let mut u = vec![0.0; d];
    for (col, &vi) in context.iter().zip(v) {
        for (ui, x) in u.iter_mut().zip(col.iter()) {
            *ui += vi * x;
        }
    }
    let mean_dot: f64 = context
        .iter()
        .map(|c| c.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>())
        .sum();
    if mean_dot < 0.0 {
        u.iter_mut().for_each(|x| *x = -*x);
    }
    l2_normalized(&u)
}

/// `Z_t` against a trailing context of `len` vectors; `None` until `len`
/// past vectors exist.
fn context_z(h: &[Vec<f64>], len: usize, use_svd: bool) -> Vec<Option<f64>> {
    (0..h.len())
        .map(|i| {
            if i < len {
                return None;
            }
            let ctx = &h[i - len..i];
            let u = if use_svd {
                top_singular_vector(&ctx.iter().map(Vec::as_slice).collect::<Vec<_>>())
            } else {
                weighted_mean(ctx, &vec![1.0 / len as f64; len], h[i].len())
            };
            Some(cosine_distance(&h[i], &u))
        })
        .collect()
}

/// Combines short/long `Z` series into a first-difference score.
pub fn combine_z(short: &[Option<f64>], long: &[Option<f64>], order: DifferenceOrder) -> Vec<Option<f64>> {
    let both = |i: usize| short[i].zip(long[i]);
    (0..short.len())
        .map(|i| {
            if i == 0 {
                return None;
            }
            let ((s, l), (s_prev, l_prev)) = (both(i)?, both(i - 1)?);
            Some(match order {
                DifferenceOrder::MaxThenDifference => (s.max(l) - s_prev.max(l_prev)).max(0.0),
                DifferenceOrder::ClampThenMax => (s - s_prev).max(0.0).max((l - l_prev).max(0.0)),
            })
        })
        .collect()
}

fn context_scores(h: &[Vec<f64>], cfg: &CascadeConfig, order: DifferenceOrder) -> Vec<Option<f64>> {
    let use_svd = cfg.stage == CascadeStage::S0;
    let short = context_z(h, cfg.context.0, use_svd);
    let long = context_z(h, cfg.context.1, use_svd);
    if cfg.stage == CascadeStage::S2 {
        return short
            .iter()
            .zip(&long)
            .map(|(s, l)| Some(s.as_ref()?.max(*l.as_ref()?)))
            .collect();
    }
    combine_z(&short, &long, order)
}

fn window_scores(h: &[Vec<f64>], cfg: &CascadeConfig) -> Vec<Option<f64>> {
    let span = cfg.window.span();
    let (test_w, ref_w) = cfg.window.weights();
    (0..h.len())
        .map(|i| {
            if i + 1 < span {
                return None;
            }
            let window = &h[i + 1 - span..=i];
            let dim = h[i].len();
            Some(match cfg.stage {
                CascadeStage::S4 | CascadeStage::S5 => statistic(window, &test_w, &ref_w, dim, DistanceMode::Centroid),
                _ => {
                    let (reference, test) = window.split_at(ref_w.len());
                    let test_mean = weighted_mean(test, &test_w, dim);
                    let ref_mean = weighted_mean(reference, &ref_w, dim);
                    if cfg.stage == CascadeStage::S3 {
                        cosine_distance(&test_mean, &ref_mean)
                    } else {
                        l1_distance(&l2_normalized(&test_mean), &l2_normalized(&ref_mean))
                    }
                }
            })
        })
        .collect()
}

fn score_track(moments: &MomentSeries, cfg: &CascadeConfig, order: DifferenceOrder) -> Result<Vec<Option<f64>>> {
    cfg.validate()?;
    let h = stage_representation(moments, cfg)?;
    Ok(if cfg.stage.two_window() {
        window_scores(&h, cfg)
    } else {
        context_scores(&h, cfg, order)
    })
}

/// Raw per-timestep scores of a stage (SCPD differencing order).
pub fn scpd_scores(moments: &MomentSeries, cfg: &CascadeConfig) -> Result<Vec<Option<f64>>> {
    score_track(moments, cfg, DifferenceOrder::MaxThenDifference)
}

/// Scores a moment stream at one cascade stage and thresholds it.
pub fn scpd_score_stream(moments: &MomentSeries, cfg: &CascadeConfig) -> Result<ScoreSeries> {
    let scores = scpd_scores(moments, cfg)?;
    Ok(ScoreSeries::from_scores(
        moments.times(),
        &scores,
        cfg.threshold,
        cfg.cooldown,
    ))
}

/// Raw LADdos scores: as S0-S2 but clamping each context's difference
/// before the max.
pub fn laddos_scores(moments: &MomentSeries, cfg: &CascadeConfig) -> Result<Vec<Option<f64>>> {
    if cfg.stage.two_window() {
        return Err(Error::Config(format!(
            "LADdos ordering applies to context stages s0-s2, not {}",
            cfg.stage
        )));
    }
    score_track(moments, cfg, DifferenceOrder::ClampThenMax)
}

pub fn laddos_variant(moments: &MomentSeries, cfg: &CascadeConfig) -> Result<ScoreSeries> {
    let scores = laddos_scores(moments, cfg)?;
    Ok(ScoreSeries::from_scores(
        moments.times(),
        &scores,
        cfg.threshold,
        cfg.cooldown,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSweepRow {
    pub bins: BinCount,
    pub threshold: f64,
    pub mean_f1: f64,
    pub std_f1: f64,
}

/// Mean F1 per bin count with the threshold re-tuned in every cell.
pub fn bin_sweep(
    streams: &[LabelledMoments],
    cfg: &CascadeConfig,
    bins: &[BinCount],
    tolerance: u64,
) -> Result<Vec<BinSweepRow>> {
    let mut unique: Vec<BinCount> = Vec::with_capacity(bins.len());
    for &b in bins {
        if unique.contains(&b) {
            log::warn!("duplicate bin count {b} ignored");
        } else {
            unique.push(b);
        }
    }
    unique
        .into_iter()
        .map(|b| {
            let cell = CascadeConfig { bins: b, ..*cfg };
            let tracks = streams
                .iter()
                .map(|s| {
                    Ok(LabelledScores {
                        times: s.moments.times().to_vec(),
                        scores: scpd_scores(&s.moments, &cell)?,
                        change_points: s.change_points.clone(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let tuned = tune_threshold(&tracks, cfg.cooldown, tolerance);
            Ok(BinSweepRow {
                bins: b,
                threshold: tuned.threshold,
                mean_f1: tuned.mean_f1,
                std_f1: tuned.std_f1,
            })
        })
        .collect()
}

/// Multiplies every vector of a series by `s`.
pub fn scale_series(series: &MomentSeries, s: f64) -> MomentSeries {
    series.map_moments(|m: &MomentVector| {
        MomentVector::new(m.values().iter().map(|x| x * s).collect(), m.source()).with_damping(m.is_damped())
    })
}
