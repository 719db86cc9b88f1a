use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FtkError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid wake-up tree: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("strategy not applicable: {0}")]
    Inapplicable(String),
    #[error("internal defect: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, FtkError>;
