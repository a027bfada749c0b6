use thiserror::Error;

/// Errors produced by the optimizer library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LodoError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operator too large to materialize: n = {n} (limit {limit})")]
    TooLarge { n: usize, limit: usize },

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, LodoError>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(LodoError::DimensionMismatch { expected, got })
    }
}
