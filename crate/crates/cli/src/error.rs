use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{0}")]
    Invalid(String),

    #[error("{path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 2 for bad input, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } | CliError::Parse { .. } | CliError::Invalid(_) => 2,
            CliError::Write { .. } | CliError::Failed(_) => 1,
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        CliError::Invalid(message.into())
    }

    pub(crate) fn write(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Write {
            path: path.into(),
            source,
        }
    }
}

impl From<pac_core::Error> for CliError {
    fn from(e: pac_core::Error) -> Self {
        match e {
            pac_core::Error::NotConverged(_) | pac_core::Error::OracleNotConverged { .. } => {
                CliError::Failed(e.to_string())
            }
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
