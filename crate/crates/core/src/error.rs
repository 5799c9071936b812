use thiserror::Error;

/// Errors raised by the numerical and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A descriptor names a law, driver or model this crate does not implement.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// Two sequences that must line up have different lengths.
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    /// A matrix factorization failed (not positive definite, not symmetric, ...).
    #[error("factorization failed: {0}")]
    Factorization(String),
    /// Configuration could not be read or validated.
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
