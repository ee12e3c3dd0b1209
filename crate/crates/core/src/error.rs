use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClearError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    /// An exhaustive enumeration would exceed its configured cap.
    #[error("{what} needs {needed} enumeration steps, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, ClearError>;

pub(crate) fn invalid(msg: impl Into<String>) -> ClearError {
    ClearError::InvalidInput(msg.into())
}
