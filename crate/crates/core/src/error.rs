use thiserror::Error;

/// Failure categories for the laboratory.
///
/// `Validation` marks broken input contracts, `Capacity` marks size guards,
/// `Numerical` marks solver failures on well-formed input. The CLI maps the
/// first two to exit code 2 and the last to exit code 3.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("numerical error: {0}")]
    Numerical(String),
}

impl LabError {
    pub fn validation(msg: impl Into<String>) -> Self {
        LabError::Validation(msg.into())
    }

    pub fn capacity(msg: impl Into<String>) -> Self {
        LabError::Capacity(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        LabError::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
