//! One-sided matching, threshold tuning, ARL0/ADD sweeps, grid search and
//! k-sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::{apply_threshold, detect_stream, DetectorConfig, Threshold};
use crate::kpm::MomentSeries;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub tolerance: u64,
    /// `(true change point, detection)` pairs.
    pub matched: Vec<(u64, u64)>,
    pub false_positives: Vec<u64>,
    pub false_negatives: Vec<u64>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Earliest-first one-to-one matching: each detection, in time order, takes
/// the earliest unmatched change point `tau` with `tau <= d <= tau + tolerance`.
pub fn match_detections(true_cps: &[u64], detections: &[u64], tolerance: u64) -> MatchReport {
    let mut cps = true_cps.to_vec();
    cps.sort_unstable();
    let mut dets = detections.to_vec();
    dets.sort_unstable();
    let mut used = vec![false; cps.len()];
    let mut matched = Vec::new();
    let mut false_positives = Vec::new();
    for &d in &dets {
        let hit = cps
            .iter()
            .enumerate()
            .find(|&(i, &tau)| !used[i] && tau <= d && d <= tau + tolerance);
        match hit {
            Some((i, &tau)) => {
                used[i] = true;
                matched.push((tau, d));
            }
            None => false_positives.push(d),
        }
    }
    let false_negatives: Vec<u64> = cps.iter().zip(&used).filter(|(_, &u)| !u).map(|(&c, _)| c).collect();
    let tp = matched.len() as f64;
    let ratio = |num: f64, den: usize| if den == 0 { 0.0 } else { num / den as f64 };
    let precision = ratio(tp, dets.len());
    let recall = ratio(tp, cps.len());
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    MatchReport {
        tolerance,
        matched,
        false_positives,
        false_negatives,
        precision,
        recall,
        f1,
    }
}

/// A stream's raw score track with its ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelledScores {
    pub times: Vec<u64>,
    pub scores: Vec<Option<f64>>,
    pub change_points: Vec<u64>,
}

impl LabelledScores {
    pub fn evaluate(&self, threshold: f64, cooldown: usize, tolerance: u64) -> MatchReport {
        let det = apply_threshold(&self.times, &self.scores, threshold, cooldown);
        match_detections(&self.change_points, &det, tolerance)
    }
}

/// A moment stream with its ground truth.
#[derive(Debug, Clone)]
pub struct LabelledMoments {
    pub moments: MomentSeries,
    pub change_points: Vec<u64>,
}

/// Population mean and standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunedThreshold {
    /// `inf` when no positive score exists.
    pub threshold: f64,
    pub mean_f1: f64,
    pub std_f1: f64,
    pub false_positives: usize,
}

const MAX_CANDIDATES: usize = 2000;

/// Candidate thresholds: the distinct positive scores, thinned by rank to at
/// most 2000.
pub fn threshold_candidates(streams: &[LabelledScores]) -> Vec<f64> {
    let mut all: Vec<f64> = streams
        .iter()
        .flat_map(|s| s.scores.iter().flatten().copied())
        .filter(|x| x.is_finite() && *x > 0.0)
        .collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    if all.len() > MAX_CANDIDATES {
        let last = all.len() - 1;
        all = (0..MAX_CANDIDATES)
            .map(|i| all[i * last / (MAX_CANDIDATES - 1)])
            .collect();
    }
    all
}

/// Threshold maximizing mean F1 over `streams`; ties go to the larger
/// threshold.
pub fn tune_threshold(streams: &[LabelledScores], cooldown: usize, tolerance: u64) -> TunedThreshold {
    let mut best = TunedThreshold {
        threshold: f64::INFINITY,
        mean_f1: 0.0,
        std_f1: 0.0,
        false_positives: 0,
    };
    for theta in threshold_candidates(streams).into_iter().rev() {
        let reports: Vec<MatchReport> = streams.iter().map(|s| s.evaluate(theta, cooldown, tolerance)).collect();
        let f1s: Vec<f64> = reports.iter().map(|r| r.f1).collect();
        let (mean, std) = mean_std(&f1s);
        if mean > best.mean_f1 {
            best = TunedThreshold {
                threshold: theta,
                mean_f1: mean,
                std_f1: std,
                false_positives: reports.iter().map(|r| r.false_positives.len()).sum(),
            };
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArlAddRow {
    pub threshold: f64,
    pub arl0: f64,
    /// Fraction of null runs without any alarm (counted as `t_null`).
    pub censored: f64,
    pub detection_rate: f64,
    /// Mean delay over detected change runs; only when the detection rate
    /// is at least 0.3.
    pub add: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArlAddReport {
    pub t_null: u64,
    pub rows: Vec<ArlAddRow>,
}

impl ArlAddReport {
    /// First row (thresholds ascending) whose ARL0 reaches `target`.
    pub fn at_arl(&self, target: f64) -> Option<&ArlAddRow> {
        self.rows.iter().find(|r| r.arl0 >= target)
    }
}

pub const MIN_REPORTED_DETECTION_RATE: f64 = 0.3;

fn first_alarm(s: &LabelledScores, theta: f64, from: u64) -> Option<u64> {
    s.times
        .iter()
        .zip(&s.scores)
        .find(|&(&t, score)| t >= from && score.is_some_and(|x| x >= theta))
        .map(|(&t, _)| t)
}

/// ARL0 from null runs of length `t_null` and detection rate / ADD from
/// change runs whose first change point is `tau`. A change run is detected
/// at its first alarm at or after `tau`.
pub fn measure_arl_add(
    null_runs: &[LabelledScores],
    change_runs: &[LabelledScores],
    thresholds: &[f64],
    t_null: u64,
) -> Result<ArlAddReport> {
    if thresholds.len() < 2 {
        return Err(Error::Config("an ARL/ADD sweep needs at least 2 thresholds".into()));
    }
    if null_runs.is_empty() || change_runs.is_empty() {
        return Err(Error::Config("ARL/ADD needs null and change runs".into()));
    }
    let mut sorted = thresholds.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let rows = sorted
        .iter()
        .map(|&theta| {
            let runs: Vec<Option<u64>> = null_runs.iter().map(|s| first_alarm(s, theta, 0)).collect();
            let arl0 = runs.iter().map(|r| r.unwrap_or(t_null) as f64).sum::<f64>() / runs.len() as f64;
            let censored = runs.iter().filter(|r| r.is_none()).count() as f64 / runs.len() as f64;
            let delays: Vec<f64> = change_runs
                .iter()
                .filter_map(|s| {
                    let tau = *s.change_points.first()?;
                    first_alarm(s, theta, tau).map(|t| (t - tau) as f64)
                })
                .collect();
            let detection_rate = delays.len() as f64 / change_runs.len() as f64;
            let add = (detection_rate >= MIN_REPORTED_DETECTION_RATE && !delays.is_empty())
                .then(|| delays.iter().sum::<f64>() / delays.len() as f64);
            ArlAddRow {
                threshold: theta,
                arl0,
                censored,
                detection_rate,
                add,
            }
        })
        .collect();
    Ok(ArlAddReport { t_null, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow<C> {
    pub config: C,
    pub mean_f1: f64,
    pub std_f1: f64,
    pub false_positives: usize,
    /// `w + w_ref`, or 0 for methods without windows.
    pub span: usize,
}

/// Evaluates every config on seeds `0..seeds` and ranks by mean F1, then
/// fewer false positives, then smaller span. Returns at most `top` rows.
pub fn grid_search<C, E, S>(configs: &[C], seeds: usize, top: usize, evaluate: E, span: S) -> Result<Vec<GridRow<C>>>
where
    C: Clone + Sync + Send,
    E: Fn(&C, usize) -> Result<MatchReport> + Sync,
    S: Fn(&C) -> usize + Sync,
{
    if configs.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    if seeds == 0 {
        return Err(Error::Config("grid search needs at least one seed".into()));
    }
    let mut rows = configs
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let reports = (0..seeds).map(|s| evaluate(c, s)).collect::<Result<Vec<_>>>()?;
            let f1s: Vec<f64> = reports.iter().map(|r| r.f1).collect();
            let (mean_f1, std_f1) = mean_std(&f1s);
            Ok((
                i,
                GridRow {
                    config: c.clone(),
                    mean_f1,
                    std_f1,
                    false_positives: reports.iter().map(|r| r.false_positives.len()).sum(),
                    span: span(c),
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|(i, a), (j, b)| {
        b.mean_f1
            .total_cmp(&a.mean_f1)
            .then(a.false_positives.cmp(&b.false_positives))
            .then(a.span.cmp(&b.span))
            .then(i.cmp(j))
    });
    rows.truncate(top);
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

/// Raw SWORD scores (no thresholding) for a moment stream.
pub fn sword_scores(series: &MomentSeries, cfg: &DetectorConfig) -> Result<Vec<Option<f64>>> {
    let raw = DetectorConfig {
        threshold: Threshold::Absolute(f64::INFINITY),
        ..*cfg
    };
    Ok(detect_stream(series, &raw)?.scores())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSweepRow {
    pub k: usize,
    pub mean_f1: f64,
    pub std_f1: f64,
    /// Threshold chosen for each stream.
    pub thresholds: Vec<f64>,
}

/// F1 per moment order with every other setting of `base` fixed and the
/// threshold re-tuned per `k` on each stream separately.
pub fn k_sweep(
    streams: &[LabelledMoments],
    base: &DetectorConfig,
    ks: &[usize],
    tolerance: u64,
) -> Result<Vec<KSweepRow>> {
    let available = streams.iter().map(|s| s.moments.order()).min().unwrap_or(0);
    if let Some(&k) = ks.iter().find(|&&k| k > available || k == 0) {
        return Err(Error::Range {
            requested: k,
            available,
        });
    }
    ks.par_iter()
        .map(|&k| {
            let cfg = DetectorConfig { order: k, ..*base };
            let tuned = streams
                .iter()
                .map(|s| {
                    let track = LabelledScores {
                        times: s.moments.times().to_vec(),
                        scores: sword_scores(&s.moments, &cfg)?,
                        change_points: s.change_points.clone(),
                    };
                    Ok(tune_threshold(std::slice::from_ref(&track), base.cooldown, tolerance))
                })
                .collect::<Result<Vec<_>>>()?;
            let f1s: Vec<f64> = tuned.iter().map(|t| t.mean_f1).collect();
            let (mean_f1, std_f1) = mean_std(&f1s);
            Ok(KSweepRow {
                k,
                mean_f1,
                std_f1,
                thresholds: tuned.iter().map(|t| t.threshold).collect(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::{DistanceMode, WindowSpec};
    use proptest::prelude::*;

    #[test]
    fn two_detections_one_change() {
        let r = match_detections(&[50], &[52, 54], 5);
        assert_eq!(r.matched, vec![(50, 52)]);
        assert_eq!(r.false_positives, vec![54]);
        assert_eq!((r.precision, r.recall), (0.5, 1.0));
        assert!((r.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn early_detection_is_false_positive() {
        let r = match_detections(&[50], &[49], 5);
        assert!(r.matched.is_empty());
        assert_eq!(r.false_positives, vec![49]);
        assert_eq!(r.f1, 0.0);
    }

    #[test]
    fn no_detections() {
        let r = match_detections(&[50, 100], &[], 5);
        assert_eq!(r.f1, 0.0);
        assert_eq!(r.false_negatives, vec![50, 100]);
    }

    #[test]
    fn earliest_change_point_wins() {
        // 55 is inside both windows; it takes 50, leaving 53 for nothing.
        let r = match_detections(&[50, 53], &[55, 56], 5);
        assert_eq!(r.matched, vec![(50, 55), (53, 56)]);
        let r = match_detections(&[50, 53], &[54], 5);
        assert_eq!(r.matched, vec![(50, 54)]);
        assert_eq!(r.false_negatives, vec![53]);
    }

    proptest! {
        #[test]
        fn matching_is_consistent(
            cps in proptest::collection::btree_set(1u64..200, 0..6),
            dets in proptest::collection::btree_set(1u64..200, 0..10),
            tol in 0u64..10,
        ) {
            let cps: Vec<u64> = cps.into_iter().collect();
            let dets: Vec<u64> = dets.into_iter().collect();
            let r = match_detections(&cps, &dets, tol);
            prop_assert_eq!(r.matched.len() + r.false_positives.len(), dets.len());
            prop_assert_eq!(r.matched.len() + r.false_negatives.len(), cps.len());
            for &(tau, d) in &r.matched {
                prop_assert!(tau <= d && d <= tau + tol);
            }
            let tp = r.matched.len() as f64;
            if !dets.is_empty() {
                prop_assert!((r.precision - tp / dets.len() as f64).abs() < 1e-15);
            }
            let mut reversed = dets.clone();
            reversed.reverse();
            prop_assert_eq!(&match_detections(&cps, &reversed, tol), &r);
        }
    }

    fn track(scores: &[f64], cps: &[u64]) -> LabelledScores {
        LabelledScores {
            times: (1..=scores.len() as u64).collect(),
            scores: scores.iter().map(|&s| Some(s)).collect(),
            change_points: cps.to_vec(),
        }
    }

    #[test]
    fn tuning_prefers_larger_threshold_on_ties() {
        let s = track(&[0.1, 0.2, 0.1, 0.9, 0.8, 0.1], &[4]);
        let t = tune_threshold(&[s], 10, 2);
        assert_eq!(t.mean_f1, 1.0);
        assert_eq!(t.threshold, 0.9);
    }

    #[test]
    fn all_zero_scores_never_tune() {
        let s = track(&[0.0; 10], &[5]);
        let t = tune_threshold(&[s], 1, 2);
        assert_eq!(t.threshold, f64::INFINITY);
        assert_eq!(t.mean_f1, 0.0);
    }

    #[test]
    fn arl_degenerate_thresholds() {
        // Scores defined from t = 5 (w + w_ref = 4 style burn-in).
        let mut s = track(&[0.2; 20], &[10]);
        s.scores[..4].iter_mut().for_each(|x| *x = None);
        let report = measure_arl_add(
            std::slice::from_ref(&s),
            std::slice::from_ref(&s),
            &[0.0, f64::INFINITY],
            500,
        )
        .unwrap();
        let zero = &report.rows[0];
        assert_eq!(zero.arl0, 5.0);
        assert_eq!(zero.add, Some(0.0));
        assert_eq!(zero.detection_rate, 1.0);
        let inf = &report.rows[1];
        assert_eq!(inf.arl0, 500.0);
        assert_eq!(inf.censored, 1.0);
        assert_eq!(inf.detection_rate, 0.0);
        assert_eq!(inf.add, None);
    }

    #[test]
    fn arl_needs_two_thresholds() {
        let s = track(&[0.2; 5], &[3]);
        assert!(measure_arl_add(std::slice::from_ref(&s), std::slice::from_ref(&s), &[0.1], 100).is_err());
    }

    proptest! {
        #[test]
        fn arl_is_monotone(scores in proptest::collection::vec(0.0f64..1.0, 30), thetas in proptest::collection::vec(0.0f64..1.2, 2..8)) {
            let s = track(&scores, &[15]);
            let r = measure_arl_add(std::slice::from_ref(&s), std::slice::from_ref(&s), &thetas, 30).unwrap();
            for w in r.rows.windows(2) {
                prop_assert!(w[0].arl0 <= w[1].arl0);
            }
        }
    }

    #[test]
    fn grid_ranks_and_breaks_ties() {
        let configs = vec![(0.5, 4), (0.9, 2), (0.9, 6), (0.2, 2)];
        let rows = grid_search(
            &configs,
            2,
            50,
            |&(f1, _), _| {
                Ok(MatchReport {
                    tolerance: 5,
                    matched: vec![],
                    false_positives: vec![],
                    false_negatives: vec![],
                    precision: f1,
                    recall: f1,
                    f1,
                })
            },
            |&(_, span)| span,
        )
        .unwrap();
        let order: Vec<_> = rows.iter().map(|r| r.config).collect();
        assert_eq!(order, vec![(0.9, 2), (0.9, 6), (0.5, 4), (0.2, 2)]);
        assert!(rows.iter().all(|r| r.std_f1 == 0.0));
        let empty: Vec<(f64, usize)> = vec![];
        assert!(grid_search(&empty, 1, 50, |_, _| unreachable!(), |_| 0).is_err());
    }

    #[test]
    fn k_sweep_rejects_orders_beyond_cache() {
        let streams = vec![LabelledMoments {
            moments: MomentSeries::from_values(vec![vec![0.0, 0.1]; 10]),
            change_points: vec![5],
        }];
        let base = DetectorConfig::new(0.1, WindowSpec::symmetric(2), 2, 5, DistanceMode::Centroid);
        assert!(matches!(k_sweep(&streams, &base, &[1, 3], 5), Err(Error::Range { .. })));
        let rows = k_sweep(&streams, &base, &[1, 2], 5).unwrap();
        assert_eq!(rows.len(), 2);
    }
}
