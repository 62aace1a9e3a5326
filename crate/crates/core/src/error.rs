use thiserror::Error;

/// Errors produced by the coding library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch in {op}: {detail}")]
    Shape { op: &'static str, detail: String },

    #[error("unsupported leaf for {op}: {leaf}")]
    UnsupportedLeaf { op: &'static str, leaf: String },

    #[error("codebook too large: k = {k} exceeds limit {limit}")]
    CodebookTooLarge { k: usize, limit: usize },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("non-finite loss at {phase} step {step}")]
    NonFiniteLoss { phase: String, step: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}
