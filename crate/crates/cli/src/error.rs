use std::path::PathBuf;

use sumprod_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(CoreError::BudgetExceeded { .. }) => 3,
            CliError::Core(CoreError::Invariant(_)) => 4,
            _ => 2,
        }
    }
}

impl From<sumprod_core::ProbError> for CliError {
    fn from(e: sumprod_core::ProbError) -> Self {
        CliError::Core(e.into())
    }
}

impl From<sumprod_core::TableError> for CliError {
    fn from(e: sumprod_core::TableError) -> Self {
        CliError::Core(e.into())
    }
}

impl From<sumprod_core::FieldError> for CliError {
    fn from(e: sumprod_core::FieldError) -> Self {
        CliError::Core(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;
