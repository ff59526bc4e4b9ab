use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("size mismatch: expected {expected}, got {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: String, reason: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("table size {size} is too small, need at least {min}")]
    SizeTooSmall { size: usize, min: usize },

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("invalid move: {0}")]
    InvalidMove(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn params(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParams {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn check_size(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::SizeMismatch { expected, found })
        }
    }
}
