use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("product space {m}^{n} exceeds the enumeration cap {cap}")]
    CapExceeded { m: usize, n: usize, cap: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid probability vector: {0}")]
    Probability(String),

    #[error("prior is not sorted in non-increasing order")]
    Unsorted,

    #[error("{0} requires a prior")]
    MissingPrior(String),

    #[error("distortion {d} outside the supported range {range}")]
    DistortionRange { d: f64, range: String },

    #[error("unsupported source set: {0}")]
    SourceSet(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("simplex iteration limit reached")]
    IterationLimit,

    #[error("bisection did not converge, bracket [{lo}, {hi}]")]
    NoConvergence { lo: f64, hi: f64 },

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
