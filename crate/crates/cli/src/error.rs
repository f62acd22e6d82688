use std::path::PathBuf;

use nsga_pinn_core::{ProblemError, TrainError};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid config at `{key}`: {message}")]
    InvalidConfig { key: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: &'a str,
    code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    key: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<String>,
    message: String,
}

impl CliError {
    pub fn invalid(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::InvalidConfig {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::InvalidConfig { .. } => 3,
            CliError::Io { .. } | CliError::Format { .. } => 4,
            CliError::Train(TrainError::InvalidConfig { .. })
            | CliError::Problem(ProblemError::InvalidSettings(_)) => 3,
            CliError::Train(_) | CliError::Problem(_) | CliError::OracleMismatch(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::InvalidConfig { .. } => "invalid_config",
            CliError::Io { .. } => "io",
            CliError::Format { .. } => "format",
            CliError::Train(TrainError::InvalidConfig { .. }) => "invalid_config",
            CliError::Problem(ProblemError::InvalidSettings(_)) => "invalid_config",
            CliError::Train(_) | CliError::Problem(_) => "run",
            CliError::OracleMismatch(_) => "oracle_mismatch",
        }
    }

    /// One-line JSON suitable for the diagnostic stream.
    pub fn to_json_line(&self) -> String {
        let key = match self {
            CliError::InvalidConfig { key, .. } => Some(key.as_str()),
            CliError::Train(TrainError::InvalidConfig { field, .. }) => Some(*field),
            _ => None,
        };
        let path = match self {
            CliError::Io { path, .. } | CliError::Format { path, .. } => {
                Some(path.display().to_string())
            }
            _ => None,
        };
        let line = ErrorLine {
            error: self.kind(),
            code: self.exit_code(),
            key,
            path,
            message: self.to_string(),
        };
        serde_json::to_string(&line).expect("error line serializes")
    }
}
