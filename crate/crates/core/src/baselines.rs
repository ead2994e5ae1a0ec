//! Classical detectors: CUSUM and EWMA charts on the 8-dim feature stream,
//! and LAD on exact Laplacian spectra.
//!
//! Feature statistics are standardized with the mean and sample standard
//! deviation of a burn-in prefix; dimensions that are constant during
//! burn-in are masked. Neither chart resets after an alarm, so repeat alarms
//! are spaced only by the cooldown.

use serde::{Deserialize, Serialize};

use crate::detector::ScoreSeries;
use crate::graph::{FeatureVector, GraphSnapshot, DEFAULT_DENSE_LIMIT, FEATURE_DIM};
use crate::linalg::{symmetric_eigenvalues, SymMatrix};
use crate::scpd::cosine_distance;
use crate::{Error, Result};

/// Burn-in mean and sample standard deviation, with a mask for dimensions
/// whose burn-in variance is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurnInStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub active: Vec<bool>,
}

impl BurnInStats {
    pub fn fit(features: &[FeatureVector], burn_in: usize) -> Result<Self> {
        if burn_in < 2 {
            return Err(Error::Config(format!("burn-in must be >= 2 steps, got {burn_in}")));
        }
        if features.len() < burn_in {
            return Err(Error::Config(format!(
                "burn-in of {burn_in} steps exceeds stream length {}",
                features.len()
            )));
        }
        let prefix = &features[..burn_in];
        let n = burn_in as f64;
        let mut mean = vec![0.0; FEATURE_DIM];
        for f in prefix {
            for (m, x) in mean.iter_mut().zip(f.as_slice()) {
                *m += x / n;
            }
        }
        let mut std = vec![0.0; FEATURE_DIM];
        for f in prefix {
            for ((s, x), m) in std.iter_mut().zip(f.as_slice()).zip(&mean) {
                *s += (x - m).powi(2) / (n - 1.0);
            }
        }
        std.iter_mut().for_each(|s| *s = s.sqrt());
        let active: Vec<bool> = std.iter().map(|&s| s > 0.0).collect();
        if !active.iter().any(|&a| a) {
            return Err(Error::Config("every feature is constant during burn-in".into()));
        }
        Ok(Self { mean, std, active })
    }

    /// Standardized values of the active dimensions.
    pub fn standardize(&self, x: &FeatureVector) -> Vec<f64> {
        x.as_slice()
            .iter()
            .enumerate()
            .filter(|&(d, _)| self.active[d])
            .map(|(d, v)| (v - self.mean[d]) / self.std[d])
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CusumConfig {
    pub kappa: f64,
    pub threshold: f64,
    pub burn_in: usize,
    pub cooldown: usize,
}

/// Page's two-sided tabular recursion, per active dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct CusumState {
    pub kappa: f64,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

impl CusumState {
    pub fn new(dims: usize, kappa: f64) -> Self {
        Self {
            kappa,
            upper: vec![0.0; dims],
            lower: vec![0.0; dims],
        }
    }

    /// `S+ = max(0, S+ + z - kappa)`, `S- = max(0, S- - z - kappa)`; returns
    /// `max_d max(S+, S-)`.
    pub fn update(&mut self, z: &[f64]) -> f64 {
        let mut stat: f64 = 0.0;
        for ((u, l), &zd) in self.upper.iter_mut().zip(self.lower.iter_mut()).zip(z) {
            *u = (*u + zd - self.kappa).max(0.0);
            *l = (*l - zd - self.kappa).max(0.0);
            stat = stat.max(*u).max(*l);
        }
        stat
    }
}

/// CUSUM statistic per step; `None` during burn-in.
pub fn cusum_scores(features: &[FeatureVector], kappa: f64, burn_in: usize) -> Result<Vec<Option<f64>>> {
    let stats = BurnInStats::fit(features, burn_in)?;
    let dims = stats.active.iter().filter(|&&a| a).count();
    let mut state = CusumState::new(dims, kappa);
    Ok(features
        .iter()
        .enumerate()
        .map(|(i, f)| (i >= burn_in).then(|| state.update(&stats.standardize(f))))
        .collect())
}

pub fn cusum_detect(features: &[FeatureVector], times: &[u64], cfg: &CusumConfig) -> Result<ScoreSeries> {
    let scores = cusum_scores(features, cfg.kappa, cfg.burn_in)?;
    Ok(ScoreSeries::from_scores(times, &scores, cfg.threshold, cfg.cooldown))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EwmaConfig {
    /// Smoothing weight on the newest observation.
    pub lambda: f64,
    /// Control-limit width in asymptotic standard deviations.
    pub width: f64,
    pub burn_in: usize,
    pub cooldown: usize,
}

/// EWMA chart statistic `max_d |E_t - mean| / (std sqrt(lambda / (2 - lambda)))`,
/// with `E` started at the burn-in mean; an alarm is a statistic at or above
/// the width `L`.
pub fn ewma_scores(features: &[FeatureVector], lambda: f64, burn_in: usize) -> Result<Vec<Option<f64>>> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::Config(format!("EWMA lambda {lambda} not in (0, 1]")));
    }
    let stats = BurnInStats::fit(features, burn_in)?;
    let scale = (lambda / (2.0 - lambda)).sqrt();
    let mut smoothed: Vec<f64> = vec![0.0; stats.active.iter().filter(|&&a| a).count()];
    Ok(features
        .iter()
        .enumerate()
        .map(|(i, f)| {
            if i < burn_in {
                return None;
            }
            let z = stats.standardize(f);
            let mut stat: f64 = 0.0;
            for (e, zd) in smoothed.iter_mut().zip(z) {
                *e = lambda * zd + (1.0 - lambda) * *e;
                stat = stat.max(e.abs() / scale);
            }
            Some(stat)
        })
        .collect())
}

pub fn ewma_detect(features: &[FeatureVector], times: &[u64], cfg: &EwmaConfig) -> Result<ScoreSeries> {
    let scores = ewma_scores(features, cfg.lambda, cfg.burn_in)?;
    Ok(ScoreSeries::from_scores(times, &scores, cfg.width, cfg.cooldown))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadConfig {
    #[serde(default = "default_rank")]
    pub rank: usize,
    #[serde(default = "default_windows")]
    pub windows: (usize, usize),
    pub threshold: f64,
    pub cooldown: usize,
    #[serde(default = "default_dense_limit")]
    pub dense_limit: usize,
}

fn default_rank() -> usize {
    6
}

fn default_windows() -> (usize, usize) {
    (5, 10)
}

fn default_dense_limit() -> usize {
    DEFAULT_DENSE_LIMIT
}

impl LadConfig {
    pub fn new(threshold: f64, cooldown: usize) -> Self {
        Self {
            rank: default_rank(),
            windows: default_windows(),
            threshold,
            cooldown,
            dense_limit: default_dense_limit(),
        }
    }
}

/// Top-`rank` eigenvalues (descending) of the combinatorial Laplacian
/// `D - A`, L2-normalized. These equal its singular values since the
/// matrix is positive semidefinite.
pub fn lad_signature(g: &GraphSnapshot, rank: usize, dense_limit: usize) -> Result<Vec<f64>> {
    let n = g.n();
    if n > dense_limit {
        return Err(Error::DenseLimit { n, limit: dense_limit });
    }
    let mut m = SymMatrix::zeros(n);
    for u in 0..n {
        m.set(u, u, g.degree(u) as f64);
        for &v in g.neighbors(u) {
            m.set(u, v as usize, -1.0);
        }
    }
    let mut values = symmetric_eigenvalues(&m);
    values.reverse();
    values.truncate(rank);
    let norm = values.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        values.iter_mut().for_each(|x| *x /= norm);
    }
    Ok(values)
}

/// `max(Z_short, Z_long)` with `Z = 1 - cos(signature_t, context)` and the
/// context the normalized sum of the previous `window` signatures.
pub fn lad_scores(snapshots: &[GraphSnapshot], cfg: &LadConfig) -> Result<Vec<Option<f64>>> {
    let (short, long) = cfg.windows;
    if short == 0 || long == 0 {
        return Err(Error::Config("LAD windows must be >= 1".into()));
    }
    let min_n = snapshots.iter().map(GraphSnapshot::n).min().unwrap_or(0);
    let rank = if cfg.rank > min_n {
        log::warn!("LAD rank {} exceeds node count {min_n}; clamped", cfg.rank);
        min_n
    } else {
        cfg.rank
    };
    let signatures = {
        use rayon::prelude::*;
        snapshots
            .par_iter()
            .map(|g| lad_signature(g, rank, cfg.dense_limit))
            .collect::<Result<Vec<_>>>()?
    };
    let z = |i: usize, len: usize| {
        let mut ctx = vec![0.0; rank];
        for s in &signatures[i - len..i] {
            ctx.iter_mut().zip(s).for_each(|(c, x)| *c += x);
        }
        cosine_distance(&signatures[i], &ctx)
    };
    let need = short.max(long);
    Ok((0..signatures.len())
        .map(|i| (i >= need).then(|| z(i, short).max(z(i, long))))
        .collect())
}

pub fn lad_detect(snapshots: &[GraphSnapshot], cfg: &LadConfig) -> Result<ScoreSeries> {
    let scores = lad_scores(snapshots, cfg)?;
    let times: Vec<u64> = snapshots.iter().map(GraphSnapshot::t).collect();
    Ok(ScoreSeries::from_scores(&times, &scores, cfg.threshold, cfg.cooldown))
}
