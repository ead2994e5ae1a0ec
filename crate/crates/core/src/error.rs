use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("graph has {n} nodes, over the dense limit of {limit}; use the KPM estimator instead")]
    DenseLimit { n: usize, limit: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("order {requested} out of range (available {available})")]
    Range { requested: usize, available: usize },

    #[error("expected {expected} moment vectors, got {actual}")]
    Arity { expected: usize, actual: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
