use super::{DetectorConfig, DistanceMode};
use crate::kpm::{gamma_distance, l1_distance};
use crate::{Error, Result};

/// `sum_i weights[i] * vectors[i][..k]`.
pub fn weighted_mean<V: AsRef<[f64]>>(vectors: &[V], weights: &[f64], k: usize) -> Vec<f64> {
    let mut mean = vec![0.0; k];
    for (v, &w) in vectors.iter().zip(weights) {
        for (m, x) in mean.iter_mut().zip(&v.as_ref()[..k]) {
            *m += w * x;
        }
    }
    mean
}

/// `D_t` over `w_ref + w` vectors ordered oldest first: the first `w_ref`
/// form the reference window, the last `w` the test window.
pub fn window_statistic<V: AsRef<[f64]>>(moments: &[V], cfg: &DetectorConfig) -> Result<f64> {
    let span = cfg.window.span();
    if moments.len() != span {
        return Err(Error::Arity {
            expected: span,
            actual: moments.len(),
        });
    }
    if let Some(short) = moments.iter().map(|m| m.as_ref().len()).find(|&len| len < cfg.order) {
        return Err(Error::Range {
            requested: cfg.order,
            available: short,
        });
    }
    let (test_w, ref_w) = cfg.window.weights();
    Ok(statistic(moments, &test_w, &ref_w, cfg.order, cfg.mode))
}

/// Unchecked core shared with the online detector and the scaffold.
pub(crate) fn statistic<V: AsRef<[f64]>>(
    moments: &[V],
    test_weights: &[f64],
    ref_weights: &[f64],
    k: usize,
    mode: DistanceMode,
) -> f64 {
    let (reference, test) = moments.split_at(ref_weights.len());
    match mode {
        DistanceMode::MeanPairwise => {
            let mut total = 0.0;
            for (a, &alpha) in test.iter().zip(test_weights) {
                for (b, &beta) in reference.iter().zip(ref_weights) {
                    total += alpha * beta * l1_distance(&a.as_ref()[..k], &b.as_ref()[..k]);
                }
            }
            total
        }
        DistanceMode::Centroid => l1_distance(
            &weighted_mean(test, test_weights, k),
            &weighted_mean(reference, ref_weights, k),
        ),
        DistanceMode::WeightedGamma => gamma_distance(
            &weighted_mean(test, test_weights, k),
            &weighted_mean(reference, ref_weights, k),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::{Threshold, WindowSpec};

    fn cfg(window: WindowSpec, k: usize, mode: DistanceMode) -> DetectorConfig {
        DetectorConfig {
            threshold: Threshold::Absolute(1.0),
            order: k,
            cooldown: 1,
            mode,
            window,
        }
    }

    const MODES: [DistanceMode; 3] = [
        DistanceMode::MeanPairwise,
        DistanceMode::Centroid,
        DistanceMode::WeightedGamma,
    ];

    #[test]
    fn identical_vectors_score_zero() {
        let v = vec![vec![0.1, -0.5, 0.3]; 6];
        for mode in MODES {
            assert_eq!(
                window_statistic(&v, &cfg(WindowSpec::asymmetric(2, 4), 3, mode)).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn linear_one_dimensional_example() {
        let at = |t: f64| vec![0.01 * t];
        for shift in [0.0, 17.0, 1000.0] {
            let v: Vec<_> = (1..=4).map(|t| at(t as f64 + shift)).collect();
            let c = window_statistic(&v, &cfg(WindowSpec::symmetric(2), 1, DistanceMode::Centroid)).unwrap();
            let p = window_statistic(&v, &cfg(WindowSpec::symmetric(2), 1, DistanceMode::MeanPairwise)).unwrap();
            assert!((c - 0.02).abs() < 1e-12, "{c}");
            assert!((p - 0.02).abs() < 1e-12, "{p}");
        }
    }

    #[test]
    fn two_cluster_example() {
        let mut v = vec![vec![0.0, 0.0]; 3];
        v.extend(vec![vec![0.3, 0.4]; 3]);
        let spec = WindowSpec::symmetric(3);
        let get = |mode| window_statistic(&v, &cfg(spec, 2, mode)).unwrap();
        assert!((get(DistanceMode::Centroid) - 0.7).abs() < 1e-12);
        assert!((get(DistanceMode::MeanPairwise) - 0.7).abs() < 1e-12);
        assert!((get(DistanceMode::WeightedGamma) - 0.13f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn single_pair_reduces_to_pairwise_distances() {
        let v = vec![vec![0.2, -0.4, 0.1], vec![-0.1, 0.3, 0.6]];
        let spec = WindowSpec::symmetric(1);
        let d = l1_distance(&v[0], &v[1]);
        let g = gamma_distance(&v[0], &v[1]);
        assert_eq!(
            window_statistic(&v, &cfg(spec, 3, DistanceMode::MeanPairwise)).unwrap(),
            d
        );
        assert_eq!(window_statistic(&v, &cfg(spec, 3, DistanceMode::Centroid)).unwrap(), d);
        assert_eq!(
            window_statistic(&v, &cfg(spec, 3, DistanceMode::WeightedGamma)).unwrap(),
            g
        );
    }

    #[test]
    fn arity_and_order_errors() {
        let v = vec![vec![0.0; 2]; 3];
        let c = cfg(WindowSpec::symmetric(2), 2, DistanceMode::Centroid);
        assert!(matches!(
            window_statistic(&v, &c),
            Err(Error::Arity { expected: 4, actual: 3 })
        ));
        let v = vec![vec![0.0; 2]; 4];
        let c = cfg(WindowSpec::symmetric(2), 3, DistanceMode::Centroid);
        assert!(matches!(window_statistic(&v, &c), Err(Error::Range { .. })));
    }
}
