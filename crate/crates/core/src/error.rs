use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for {what} (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("{0} must be non-zero")]
    ZeroDimension(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A target violates the signal model (e.g. its echo outlasts the cyclic prefix).
    #[error("model violation: {0}")]
    ModelViolation(String),

    #[error("payload entry ({row}, {col}) is zero; cannot divide it out")]
    ZeroDivisor { row: usize, col: usize },

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NonHermitian { asymmetry: f64 },

    #[error("degenerate subspace: {0}")]
    DegenerateSubspace(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("eigendecomposition failed to converge")]
    EigenFailure,

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
