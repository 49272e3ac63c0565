use std::io;

use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] phg_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("malformed grid file {path}: {reason}")]
    GridFormat { path: String, reason: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use phg_core::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(E::Budget { .. } | E::SizeOverflow { .. }) => EXIT_RESOURCE,
            CliError::Core(_) => EXIT_USAGE,
            _ => EXIT_CHECK_FAILED,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
