use super::{GraphSnapshot, ShiftedLaplacian};
use crate::linalg::symmetric_eigenvalues;
use crate::{Error, Result};

/// Largest graph the dense eigendecomposition oracle will accept.
pub const DEFAULT_DENSE_LIMIT: usize = 2000;

/// Ascending eigenvalues of `L - I`.
pub fn exact_spectrum(g: &GraphSnapshot, dense_limit: usize) -> Result<Vec<f64>> {
    let n = g.n();
    if n > dense_limit {
        return Err(Error::DenseLimit { n, limit: dense_limit });
    }
    Ok(symmetric_eigenvalues(&ShiftedLaplacian::new(g).to_dense()))
}

/// 1-Wasserstein distance between the empirical measures of two ascending
/// samples.
///
/// Integrates `|Q_a(u) - Q_b(u)|` over the merged quantile breakpoints
/// `i/len_a` and `j/len_b`, which at equal lengths is the mean absolute
/// difference of the sorted values.
pub fn w1_sorted(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("W1 of an empty spectrum".into()));
    }
    for (name, s) in [("first", a), ("second", b)] {
        if s.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Domain(format!("{name} spectrum is not sorted ascending")));
        }
    }
    let (na, nb) = (a.len() as u128, b.len() as u128);
    // Quantile positions in units of 1/(na*nb).
    let (mut i, mut j) = (0usize, 0usize);
    let mut pos = 0u128;
    let mut total = 0.0;
    while i < a.len() && j < b.len() {
        let next_a = (i as u128 + 1) * nb;
        let next_b = (j as u128 + 1) * na;
        let next = next_a.min(next_b);
        total += (next - pos) as f64 * (a[i] - b[j]).abs();
        pos = next;
        if next_a == next {
            i += 1;
        }
        if next_b == next {
            j += 1;
        }
    }
    Ok(total / (na * nb) as f64)
}
