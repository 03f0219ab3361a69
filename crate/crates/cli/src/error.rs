use std::path::{Path, PathBuf};

use thiserror::Error;
use uidthat_core::{AnalysisError, FeatureError, LmError, RegressionError};

/// Every failure the command line can report, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("config: {field}: {message}")]
    Config { field: String, message: String },
    #[error("provider: {0}")]
    Provider(#[from] LmError),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Format { .. } => 1,
            CliError::Config { .. } => 2,
            CliError::Provider(_) => 3,
            CliError::Data(_) => 4,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn format(path: &Path, message: impl ToString) -> Self {
        CliError::Format {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }

    pub fn config(field: &str, message: impl ToString) -> Self {
        CliError::Config {
            field: field.to_string(),
            message: message.to_string(),
        }
    }
}

impl From<RegressionError> for CliError {
    fn from(e: RegressionError) -> Self {
        CliError::Data(format!("fit: {e}"))
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        CliError::Data(format!("analysis: {e}"))
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        match e {
            FeatureError::Provider(lm) => lm.into(),
            other => CliError::Data(format!("featurize: {other}")),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
