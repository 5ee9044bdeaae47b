//! Error type shared by all simulator modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Error)]
pub enum SimError {
    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed to reach its accuracy target.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The requested configuration is valid input but outside the supported
    /// feature set (e.g. pilot reuse, max-min-fairness power allocation).
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// Scenario validation failures, one message per offending field.
    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl SimError {
    pub fn domain(msg: impl Into<String>) -> Self {
        SimError::Domain(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        SimError::Numerical(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        SimError::Unsupported(msg.into())
    }
}
