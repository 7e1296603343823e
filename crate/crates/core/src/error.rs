use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("basis index {index} out of range for {num_sites} sites")]
    IndexOutOfRange { index: u64, num_sites: usize },

    #[error("invalid field `{path}`: {reason}")]
    InvalidField { path: String, reason: String },

    #[error("malformed document: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("wrong basis: expected {expected}, got {actual}")]
    WrongBasis { expected: &'static str, actual: &'static str },

    #[error("{num_sites} sites exceeds the ceiling of {ceiling}; {hint}")]
    TooLarge {
        num_sites: usize,
        ceiling: usize,
        hint: &'static str,
    },

    #[error(
        "norm drift {drift:.3e} exceeds tolerance {tol:.1e} at t = {time}; use a smaller step"
    )]
    NormDrift { drift: f64, tol: f64, time: f64 },

    #[error("eigensolver did not converge at t = {time}: {reason}")]
    EigenNoConvergence { time: f64, reason: String },

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-parsable category, used as the CLI error prefix.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidInstance(_) | Error::InvalidField { .. } => "invalid-input",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::IndexOutOfRange { .. } => "index-out-of-range",
            Error::Parse(_) => "parse",
            Error::InvalidConfig(_) => "invalid-config",
            Error::WrongBasis { .. } => "wrong-basis",
            Error::TooLarge { .. } => "too-large",
            Error::NormDrift { .. } => "norm-drift",
            Error::EigenNoConvergence { .. } => "eigensolver",
            Error::CheckFailed(_) => "check-failed",
            Error::Io(_) => "io",
            Error::Csv(_) => "io",
        }
    }
}
