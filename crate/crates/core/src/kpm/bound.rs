use serde::Serialize;

use super::{exact_moments, gamma_discrepancy};
use crate::graph::{exact_spectrum, w1_sorted, GraphSnapshot};
use crate::Result;

/// Universal constant in `W1 <= C/k + Gamma`.
pub const WASSERSTEIN_BOUND_CONSTANT: f64 = 36.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub k: usize,
    pub w1: f64,
    pub gamma: f64,
    /// `C/k + Gamma`.
    pub bound: f64,
    pub bound_ok: bool,
}

/// Checks `W1 <= 36/k + Gamma` for two graphs using the exact spectra.
pub fn verify_wasserstein_bound(
    a: &GraphSnapshot,
    b: &GraphSnapshot,
    k: usize,
    dense_limit: usize,
) -> Result<BoundReport> {
    let w1 = w1_sorted(&exact_spectrum(a, dense_limit)?, &exact_spectrum(b, dense_limit)?)?;
    let gamma = gamma_discrepancy(
        &exact_moments(a, k, dense_limit)?,
        &exact_moments(b, k, dense_limit)?,
        k,
    )?;
    let bound = WASSERSTEIN_BOUND_CONSTANT / k as f64 + gamma;
    Ok(BoundReport {
        k,
        w1,
        gamma,
        bound,
        bound_ok: w1 <= bound,
    })
}
