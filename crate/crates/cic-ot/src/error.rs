use thiserror::Error;

/// Errors shared across the transport, estimator, data-generation and
/// ingestion layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty measure: at least one atom is required")]
    EmptyMeasure,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("expected a one-dimensional measure, got d = {0}")]
    NotOneDimensional(usize),

    #[error("weights must be nonnegative and sum to 1 (sum = {sum})")]
    BadWeights { sum: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
