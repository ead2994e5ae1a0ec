//! Uniform front end over every detector so evaluation code can score,
//! threshold and tune them interchangeably.
//!
//! Each method splits into a raw score track, which depends on everything
//! except the threshold and cooldown, and a thresholding step. Grid searches
//! group configs by [`MethodConfig::score_key`] and compute each track once.

use serde::{Deserialize, Serialize};

use crate::baselines::{cusum_scores, ewma_scores, lad_scores, CusumConfig, EwmaConfig, LadConfig};
use crate::detector::{detect_stream, DetectorConfig, ScoreSeries, Threshold};
use crate::eval::sword_scores;
use crate::graph::{extract_features, FeatureVector, GraphSnapshot};
use crate::kpm::MomentSeries;
use crate::scpd::{laddos_scores, scpd_scores, CascadeConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum MethodConfig {
    Sword(DetectorConfig),
    Scpd(CascadeConfig),
    Laddos(CascadeConfig),
    Cusum(CusumConfig),
    Ewma(EwmaConfig),
    Lad(LadConfig),
}

/// What a method consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Moments,
    Features,
    Snapshots,
}

/// Everything a method may need about one stream. Missing pieces are
/// reported as configuration errors when a method asks for them.
#[derive(Debug, Clone, Default)]
pub struct StreamData {
    pub times: Vec<u64>,
    pub moments: Option<MomentSeries>,
    pub snapshots: Option<Vec<GraphSnapshot>>,
    pub features: Option<Vec<FeatureVector>>,
}

impl StreamData {
    pub fn from_moments(moments: MomentSeries) -> Self {
        Self {
            times: moments.times().to_vec(),
            moments: Some(moments),
            ..Self::default()
        }
    }

    /// Keeps the snapshots and derives their feature vectors.
    pub fn from_snapshots(snapshots: Vec<GraphSnapshot>, moments: Option<MomentSeries>) -> Self {
        let features = snapshots.iter().map(extract_features).collect();
        Self {
            times: snapshots.iter().map(GraphSnapshot::t).collect(),
            moments,
            features: Some(features),
            snapshots: Some(snapshots),
        }
    }

    fn moments(&self) -> Result<&MomentSeries> {
        self.moments
            .as_ref()
            .ok_or_else(|| Error::Config("method needs moment vectors".into()))
    }

    fn features(&self) -> Result<&[FeatureVector]> {
        self.features
            .as_deref()
            .ok_or_else(|| Error::Config("method needs snapshot features".into()))
    }

    fn snapshots(&self) -> Result<&[GraphSnapshot]> {
        self.snapshots
            .as_deref()
            .ok_or_else(|| Error::Config("method needs graph snapshots".into()))
    }
}

impl MethodConfig {
    pub fn name(&self) -> &'static str {
        match self {
            MethodConfig::Sword(_) => "sword",
            MethodConfig::Scpd(_) => "scpd",
            MethodConfig::Laddos(_) => "laddos",
            MethodConfig::Cusum(_) => "cusum",
            MethodConfig::Ewma(_) => "ewma",
            MethodConfig::Lad(_) => "lad",
        }
    }

    pub fn input(&self) -> InputKind {
        match self {
            MethodConfig::Sword(_) | MethodConfig::Scpd(_) | MethodConfig::Laddos(_) => InputKind::Moments,
            MethodConfig::Cusum(_) | MethodConfig::Ewma(_) => InputKind::Features,
            MethodConfig::Lad(_) => InputKind::Snapshots,
        }
    }

    /// The absolute alarm level (`L` for EWMA); `None` for percentile SWORD.
    pub fn threshold(&self) -> Option<f64> {
        match self {
            MethodConfig::Sword(c) => match c.threshold {
                Threshold::Absolute(t) => Some(t),
                Threshold::Percentile { .. } => None,
            },
            MethodConfig::Scpd(c) | MethodConfig::Laddos(c) => Some(c.threshold),
            MethodConfig::Cusum(c) => Some(c.threshold),
            MethodConfig::Ewma(c) => Some(c.width),
            MethodConfig::Lad(c) => Some(c.threshold),
        }
    }

    pub fn with_threshold(mut self, theta: f64) -> Self {
        match &mut self {
            MethodConfig::Sword(c) => c.threshold = Threshold::Absolute(theta),
            MethodConfig::Scpd(c) | MethodConfig::Laddos(c) => c.threshold = theta,
            MethodConfig::Cusum(c) => c.threshold = theta,
            MethodConfig::Ewma(c) => c.width = theta,
            MethodConfig::Lad(c) => c.threshold = theta,
        }
        self
    }

    pub fn cooldown(&self) -> usize {
        match self {
            MethodConfig::Sword(c) => c.cooldown,
            MethodConfig::Scpd(c) | MethodConfig::Laddos(c) => c.cooldown,
            MethodConfig::Cusum(c) => c.cooldown,
            MethodConfig::Ewma(c) => c.cooldown,
            MethodConfig::Lad(c) => c.cooldown,
        }
    }

    pub fn with_cooldown(mut self, cooldown: usize) -> Self {
        match &mut self {
            MethodConfig::Sword(c) => c.cooldown = cooldown,
            MethodConfig::Scpd(c) | MethodConfig::Laddos(c) => c.cooldown = cooldown,
            MethodConfig::Cusum(c) => c.cooldown = cooldown,
            MethodConfig::Ewma(c) => c.cooldown = cooldown,
            MethodConfig::Lad(c) => c.cooldown = cooldown,
        }
        self
    }

    /// `w + w_ref` for SWORD, 0 otherwise; used as a grid tie-break.
    pub fn span(&self) -> usize {
        match self {
            MethodConfig::Sword(c) => c.window.span(),
            _ => 0,
        }
    }

    /// Identifies the score track: equal keys give identical raw scores.
    pub fn score_key(&self) -> String {
        let base = match *self {
            MethodConfig::Sword(c) => MethodConfig::Sword(DetectorConfig {
                threshold: Threshold::Absolute(0.0),
                ..c
            }),
            other => other.with_threshold(0.0),
        };
        serde_json::to_string(&base.with_cooldown(1)).expect("method configs serialize")
    }

    /// Raw per-timestep scores, `None` during burn-in.
    pub fn scores(&self, data: &StreamData) -> Result<Vec<Option<f64>>> {
        match self {
            MethodConfig::Sword(c) => sword_scores(data.moments()?, c),
            MethodConfig::Scpd(c) => scpd_scores(data.moments()?, c),
            MethodConfig::Laddos(c) => laddos_scores(data.moments()?, c),
            MethodConfig::Cusum(c) => cusum_scores(data.features()?, c.kappa, c.burn_in),
            MethodConfig::Ewma(c) => ewma_scores(data.features()?, c.lambda, c.burn_in),
            MethodConfig::Lad(c) => lad_scores(data.snapshots()?, c),
        }
    }

    pub fn detect(&self, data: &StreamData) -> Result<ScoreSeries> {
        if let MethodConfig::Sword(c) = self {
            return detect_stream(data.moments()?, c);
        }
        let theta = self.threshold().expect("only SWORD has percentile thresholds");
        Ok(ScoreSeries::from_scores(
            &data.times,
            &self.scores(data)?,
            theta,
            self.cooldown(),
        ))
    }
}
