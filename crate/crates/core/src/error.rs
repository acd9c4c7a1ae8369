use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} entries, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("inconsistent split statistics: marginal {marginal} but dot(pi, P) = {implied}")]
    InconsistentStatistics { marginal: f64, implied: f64 },

    #[error("mixture identity violated at class {class}: parent {parent}, mixture {mixture}")]
    MixtureViolated {
        class: usize,
        parent: f64,
        mixture: f64,
    },

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: String,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no examples")]
    NoExamples,

    #[error("dataset too small: {0} examples, at least 10 required")]
    DatasetTooSmall(usize),

    #[error("tree has no nodes")]
    EmptyTree,

    #[error("invalid tree file: {0}")]
    TreeFormat(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_range(name: &'static str, value: f64, range: impl Into<String>) -> Error {
    Error::OutOfRange {
        name,
        value,
        range: range.into(),
    }
}
