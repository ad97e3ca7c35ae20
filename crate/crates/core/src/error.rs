use thiserror::Error;

/// Failure modes shared across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("out of domain: {0}")]
    OutOfDomain(String),
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    /// Stable machine-readable tag, used in CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::OutOfRange(_) => "out-of-range",
            Error::OutOfDomain(_) => "out-of-domain",
            Error::SolverFailure(_) => "solver-failure",
            Error::Unsupported(_) => "unsupported",
            Error::NumericalFailure(_) => "numerical-failure",
            Error::InsufficientData(_) => "insufficient-data",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
