use thiserror::Error;

/// Errors surfaced by the library.
///
/// `CertificationFailed` is special: it means a bound that the algorithm is
/// supposed to maintain was violated at runtime. That always indicates an
/// implementation bug (or a corrupted instance), never an unlucky input, so
/// callers should treat it as fatal and keep the message as a trace.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("certified invariant failed: {0}")]
    CertificationFailed(String),
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
