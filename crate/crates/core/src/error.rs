use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate form: smallest singular value {sigma_min:e}")]
    Degenerate { sigma_min: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("inconsistent data: {0}")]
    DataCorruption(String),

    #[error("internal check failed: {what} (residual {residual:e})")]
    Internal { what: String, residual: f64 },

    #[error("basis dimension {dim} exceeds the cap {cap}")]
    CapExceeded { dim: usize, cap: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
