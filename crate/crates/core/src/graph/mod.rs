//! Graph snapshots, the shifted normalized-Laplacian operator, exact-spectrum
//! oracles and the feature vector used by the classical baselines.

mod features;
mod io;
mod laplacian;
mod snapshot;
mod spectrum;

pub use features::{extract_features, FeatureVector, FEATURE_DIM, FEATURE_NAMES};
pub use io::{load_snapshot_stream, read_snapshot_stream, write_snapshot_stream, LoadedStream};
pub use laplacian::ShiftedLaplacian;
pub use snapshot::{BuildReport, GraphSnapshot};
pub use spectrum::{exact_spectrum, w1_sorted, DEFAULT_DENSE_LIMIT};
