use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}line {line}: {message}", path_prefix(.path))]
    Spec { path: String, line: usize, message: String },

    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error("numeric failure at {point}: {source}")]
    Numeric {
        point: String,
        #[source]
        source: raftjamsec_core::Error,
    },

    #[error("validation failed: max |z| = {max_z} exceeds {limit}")]
    ValidationFailed { max_z: f64, limit: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec { .. } | CliError::Csv { .. } => 2,
            CliError::Numeric { .. } => 3,
            CliError::ValidationFailed { .. } => 1,
            CliError::Io { .. } => 2,
        }
    }

    pub(crate) fn spec(line: usize, message: impl Into<String>) -> Self {
        CliError::Spec { path: String::new(), line, message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

fn path_prefix(path: &str) -> String {
    if path.is_empty() {
        String::new()
    } else {
        format!("{path}: ")
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
