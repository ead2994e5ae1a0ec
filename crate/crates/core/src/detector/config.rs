use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Uniform,
    /// Weights proportional to `gamma^age`, age 0 being the newest entry of
    /// each window.
    Exponential(f64),
}

/// Test and reference window lengths plus their weighting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub test: usize,
    pub reference: usize,
    #[serde(default)]
    pub weighting: Weighting,
}

impl WindowSpec {
    pub fn symmetric(w: usize) -> Self {
        Self::asymmetric(w, w)
    }

    pub fn asymmetric(test: usize, reference: usize) -> Self {
        Self {
            test,
            reference,
            weighting: Weighting::Uniform,
        }
    }

    pub fn exponential(mut self, gamma: f64) -> Self {
        self.weighting = Weighting::Exponential(gamma);
        self
    }

    /// Vectors needed for one statistic, `w + w_ref`.
    pub fn span(&self) -> usize {
        self.test + self.reference
    }

    pub fn validate(&self) -> Result<()> {
        if self.test == 0 || self.reference == 0 {
            return Err(Error::Config("window lengths must be >= 1".into()));
        }
        if let Weighting::Exponential(g) = self.weighting {
            if !(g > 0.0 && g < 1.0) {
                return Err(Error::Config(format!("exponential decay {g} not in (0, 1)")));
            }
        }
        Ok(())
    }

    /// `(test, reference)` weights, oldest entry first, each summing to 1.
    pub fn weights(&self) -> (Vec<f64>, Vec<f64>) {
        (
            window_weights(self.test, self.weighting),
            window_weights(self.reference, self.weighting),
        )
    }
}

fn window_weights(len: usize, weighting: Weighting) -> Vec<f64> {
    match weighting {
        Weighting::Uniform => vec![1.0 / len as f64; len],
        Weighting::Exponential(gamma) => {
            let raw: Vec<f64> = (0..len).map(|i| gamma.powi((len - 1 - i) as i32)).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|w| w / total).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMode {
    /// Weighted mean of pairwise L1 moment distances.
    #[default]
    MeanPairwise,
    /// L1 distance between the window means.
    #[serde(alias = "mean_distance", alias = "centroid_l1")]
    Centroid,
    /// `1/j`-weighted L2 discrepancy between the window means.
    WeightedGamma,
}

impl fmt::Display for DistanceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistanceMode::MeanPairwise => "mean_pairwise",
            DistanceMode::Centroid => "centroid",
            DistanceMode::WeightedGamma => "weighted_gamma",
        })
    }
}

impl FromStr for DistanceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean_pairwise" | "pw" => Ok(Self::MeanPairwise),
            "centroid" | "mean_distance" | "centroid_l1" | "cen" => Ok(Self::Centroid),
            "weighted_gamma" | "gamma" => Ok(Self::WeightedGamma),
            other => Err(Error::Config(format!("unknown distance mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Threshold {
    Absolute(f64),
    /// Frozen at the `p`-quantile of the first `calibration` scores.
    Percentile {
        p: f64,
        calibration: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub threshold: Threshold,
    /// Moments compared, `k`.
    pub order: usize,
    pub cooldown: usize,
    #[serde(default)]
    pub mode: DistanceMode,
    pub window: WindowSpec,
}

impl DetectorConfig {
    pub fn new(threshold: f64, window: WindowSpec, order: usize, cooldown: usize, mode: DistanceMode) -> Self {
        Self {
            threshold: Threshold::Absolute(threshold),
            order,
            cooldown,
            mode,
            window,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        if self.cooldown == 0 {
            return Err(Error::Config("cooldown must be >= 1".into()));
        }
        if self.order == 0 {
            return Err(Error::Config("moment order k must be >= 1".into()));
        }
        match self.threshold {
            Threshold::Absolute(t) if t.is_nan() => Err(Error::Config("threshold is NaN".into())),
            Threshold::Percentile { p, .. } if !(p > 0.0 && p < 1.0) => {
                Err(Error::Config(format!("percentile {p} not in (0, 1)")))
            }
            Threshold::Percentile { calibration: 0, .. } => Err(Error::Config(
                "percentile threshold needs at least one calibration score".into(),
            )),
            _ => Ok(()),
        }
    }
}
