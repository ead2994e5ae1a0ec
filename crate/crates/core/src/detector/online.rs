use std::collections::VecDeque;

use super::window::statistic;
use super::{DetectorConfig, ScoreRecord, ScoreSeries, Threshold};
use crate::kpm::MomentSeries;
use crate::{Error, Result};

/// Linear-interpolation quantile (`h = (N - 1) p`) of the calibration scores.
pub fn calibrate_percentile(scores: &[f64], p: f64) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::Config("no calibration scores".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("percentile {p} not in [0, 1]")));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Calibration span for a percentile threshold on a stream of `len`
/// snapshots: 20% of the stream, at least 5 scored steps.
pub fn default_calibration_len(len: usize) -> usize {
    ((len as f64 * 0.2).round() as usize).max(5)
}

/// Single-pass detector; every record depends only on snapshots seen so far.
#[derive(Debug, Clone)]
pub struct OnlineDetector {
    cfg: DetectorConfig,
    test_weights: Vec<f64>,
    ref_weights: Vec<f64>,
    buffer: VecDeque<Vec<f64>>,
    calibration: Vec<f64>,
    threshold: Option<f64>,
    last_detection: Option<u64>,
    last_t: Option<u64>,
}

impl OnlineDetector {
    pub fn new(cfg: DetectorConfig) -> Result<Self> {
        cfg.validate()?;
        let (test_weights, ref_weights) = cfg.window.weights();
        let threshold = match cfg.threshold {
            Threshold::Absolute(t) => Some(t),
            Threshold::Percentile { .. } => None,
        };
        Ok(Self {
            cfg,
            test_weights,
            ref_weights,
            buffer: VecDeque::with_capacity(cfg.window.span()),
            calibration: Vec::new(),
            threshold,
            last_detection: None,
            last_t: None,
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.cfg
    }

    /// Active threshold; `None` while a percentile threshold is calibrating.
    pub fn threshold(&self) -> Option<f64> {
        self.threshold
    }

    pub fn push(&mut self, t: u64, moments: &[f64]) -> Result<ScoreRecord> {
        if let Some(prev) = self.last_t {
            if t <= prev {
                return Err(Error::Validation(format!("timestep {t} does not follow {prev}")));
            }
        }
        let k = self.cfg.order;
        if moments.len() < k {
            return Err(Error::Range {
                requested: k,
                available: moments.len(),
            });
        }
        self.last_t = Some(t);
        let span = self.cfg.window.span();
        if self.buffer.len() == span {
            self.buffer.pop_front();
        }
        self.buffer.push_back(moments[..k].to_vec());
        if self.buffer.len() < span {
            return Ok(ScoreRecord {
                t,
                score: None,
                detected: false,
            });
        }

        let window = self.buffer.make_contiguous();
        let score = statistic(window, &self.test_weights, &self.ref_weights, k, self.cfg.mode);

        let theta = match (self.threshold, self.cfg.threshold) {
            (Some(theta), _) => theta,
            (None, Threshold::Percentile { p, calibration }) => {
                self.calibration.push(score);
                if self.calibration.len() >= calibration {
                    self.threshold = Some(calibrate_percentile(&self.calibration, p)?);
                }
                return Ok(ScoreRecord {
                    t,
                    score: Some(score),
                    detected: false,
                });
            }
            (None, Threshold::Absolute(_)) => unreachable!("absolute thresholds are set at construction"),
        };

        let rested = self
            .last_detection
            .is_none_or(|prev| t - prev >= self.cfg.cooldown as u64);
        let detected = score >= theta && rested;
        if detected {
            self.last_detection = Some(t);
        }
        Ok(ScoreRecord {
            t,
            score: Some(score),
            detected,
        })
    }
}

/// Runs the detector over a whole moment series.
pub fn detect_stream(series: &MomentSeries, cfg: &DetectorConfig) -> Result<ScoreSeries> {
    let mut det = OnlineDetector::new(*cfg)?;
    let records = series
        .iter()
        .map(|(t, m)| det.push(t, m.values()))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScoreSeries::from_records(records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::{DistanceMode, WindowSpec};

    fn step_stream() -> MomentSeries {
        MomentSeries::from_values((1..=100).map(|t| vec![if t < 50 { 0.0 } else { 1.0 }]).collect())
    }

    fn centroid(theta: f64, w: usize, cooldown: usize) -> DetectorConfig {
        DetectorConfig::new(theta, WindowSpec::symmetric(w), 1, cooldown, DistanceMode::Centroid)
    }

    #[test]
    fn percentile_examples() {
        let s = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(calibrate_percentile(&s, 0.5).unwrap(), 3.0);
        assert_eq!(calibrate_percentile(&s, 1.0).unwrap(), 5.0);
        assert!((calibrate_percentile(&[0.0, 10.0], 0.84).unwrap() - 8.4).abs() < 1e-12);
        assert!(matches!(calibrate_percentile(&[], 0.5), Err(Error::Config(_))));
    }

    #[test]
    fn constant_stream_never_fires() {
        let series = MomentSeries::from_values(vec![vec![0.3, -0.2]; 40]);
        let out = detect_stream(&series, &centroid(1e-9, 3, 1)).unwrap();
        assert!(out.detections.is_empty());
    }

    /// Independent forward pass over a 1-D step stream.
    fn hand_rolled(values: &[f64], w: usize, theta: f64, cooldown: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut prev: Option<u64> = None;
        for end in 2 * w..=values.len() {
            let t = end as u64;
            let reference: f64 = values[end - 2 * w..end - w].iter().sum::<f64>() / w as f64;
            let test: f64 = values[end - w..end].iter().sum::<f64>() / w as f64;
            if (test - reference).abs() >= theta && prev.is_none_or(|p| t - p >= cooldown) {
                out.push(t);
                prev = Some(t);
            }
        }
        out
    }

    #[test]
    fn step_stream_detection() {
        let series = step_stream();
        let values: Vec<f64> = series.moments().iter().map(|m| m.values()[0]).collect();
        let out = detect_stream(&series, &centroid(0.5, 3, 5)).unwrap();
        assert_eq!(out.detections, hand_rolled(&values, 3, 0.5, 5));
        assert_eq!(out.detections, vec![51]);
        assert!(out.records[..5].iter().all(|r| r.score.is_none()));
        assert!(out.records[5..].iter().all(|r| r.score.is_some()));

        let eager = detect_stream(&series, &centroid(0.5, 3, 1)).unwrap();
        assert_eq!(eager.detections, hand_rolled(&values, 3, 0.5, 1));
        assert!(eager.detections.len() > 1);
        assert!(eager.detections.windows(2).all(|w| w[1] - w[0] >= 1));
    }

    #[test]
    fn ties_fire() {
        let series = step_stream();
        let out = detect_stream(&series, &centroid(1.0, 3, 100)).unwrap();
        assert_eq!(out.detections, vec![52]);
    }

    #[test]
    fn short_stream_is_empty() {
        let series = MomentSeries::from_values(vec![vec![0.0]; 5]);
        let out = detect_stream(&series, &centroid(0.1, 3, 1)).unwrap();
        assert!(out.detections.is_empty());
        assert!(out.records.iter().all(|r| r.score.is_none()));
    }

    #[test]
    fn percentile_threshold_freezes_before_detecting() {
        let series = step_stream();
        let cfg = DetectorConfig {
            threshold: Threshold::Percentile {
                p: 0.9,
                calibration: 20,
            },
            ..centroid(0.0, 3, 5)
        };
        let mut det = OnlineDetector::new(cfg).unwrap();
        let mut frozen_at = None;
        for (t, m) in series.iter() {
            let rec = det.push(t, m.values()).unwrap();
            if frozen_at.is_none() {
                assert!(!rec.detected);
                if det.threshold().is_some() {
                    frozen_at = Some(t);
                }
            }
        }
        // Scores start at t = 6; the 20th scored step is t = 25.
        assert_eq!(frozen_at, Some(25));
        // Pre-change scores are all zero, so the frozen threshold is zero and
        // the detector fires as soon as it is armed, then once per cooldown.
        assert_eq!(det.threshold(), Some(0.0));
        let out = detect_stream(&series, &cfg).unwrap();
        assert_eq!(out.detections.first(), Some(&26));
        assert!(out.detections.windows(2).all(|w| w[1] - w[0] == 5));
    }

    #[test]
    fn rejects_short_vectors_and_bad_order() {
        let mut det = OnlineDetector::new(centroid(0.1, 1, 1)).unwrap();
        det.push(1, &[0.0]).unwrap();
        assert!(det.push(1, &[0.0]).is_err());
        let mut det = OnlineDetector::new(DetectorConfig {
            order: 3,
            ..centroid(0.1, 1, 1)
        })
        .unwrap();
        assert!(matches!(det.push(1, &[0.0, 1.0]), Err(Error::Range { .. })));
    }
}
