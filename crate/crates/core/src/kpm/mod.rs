//! Kernel polynomial method: Chebyshev moments of `L - I`, estimated with
//! Hutchinson probes or computed exactly from the dense spectrum, plus the
//! Jackson damping and density-of-states histograms used by the SCPD
//! scaffold.

mod bound;
mod cache;
mod dos;
mod jackson;
mod moments;
mod series;

pub use bound::{verify_wasserstein_bound, BoundReport, WASSERSTEIN_BOUND_CONSTANT};
pub use cache::{read_moment_cache, write_moment_cache};
pub use dos::{dos_histogram, BinCount, DosHistogram};
pub use jackson::{jackson_coefficients, jackson_damp};
pub use moments::{
    estimate_moments, estimate_stream, exact_moments, exact_stream, gamma_discrepancy, gamma_distance, l1_distance,
    moment_distance, MomentSource, MomentVector, ProbeSet, ProbeSharing, DEFAULT_ORDER, DEFAULT_PROBES,
};
pub use series::MomentSeries;
