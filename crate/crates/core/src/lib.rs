//! Online change-point detection on dynamic graph streams.
//!
//! Each snapshot is summarised by the Chebyshev moments of its shifted
//! normalized Laplacian `L - I`, estimated matrix-free with Rademacher probes
//! and the three-term recurrence. A detector compares a recent test window of
//! moment vectors with the reference window immediately before it and raises
//! an alarm when the discrepancy crosses a threshold.
//!
//! Around the detector live the pieces needed to evaluate it: exact-spectrum
//! oracles, an SVD + cosine scoring scaffold used for architectural
//! ablations, classical feature baselines (CUSUM, EWMA) and the exact-spectrum
//! LAD baseline, seeded synthetic generators, and evaluation protocols
//! (one-sided matching, ARL0/ADD sweeps, grid search, k-sweeps).

pub mod baselines;
pub mod detector;
pub mod error;
pub mod eval;
pub mod graph;
pub mod kpm;
pub mod linalg;
pub mod methods;
pub mod rng;
pub mod scpd;
pub mod suites;
pub mod synth;

pub use error::{Error, Result};
