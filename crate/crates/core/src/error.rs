use thiserror::Error;

/// Errors produced by the flux model, the scheme and the reference problems.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("root finding failed: {0}")]
    RootFailure(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("unsupported reference: {0}")]
    UnsupportedReference(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} is not finite ({value})")))
    }
}
