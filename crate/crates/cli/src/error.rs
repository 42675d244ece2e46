use std::path::{Path, PathBuf};

use crate::config::Origin;

/// Exit status for a validation run with at least one failing check.
pub const EXIT_VALIDATION_FAILED: i32 = 1;
/// Exit status for bad configuration or usage.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for file-system errors.
pub const EXIT_IO: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{location}: {key}{sep}{message}", sep = if key.is_empty() { "" } else { ": " })]
    Config {
        location: String,
        key: String,
        message: String,
    },
    #[error("model error: {0}")]
    Model(#[from] wearcov::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl CliError {
    pub fn config(origin: &Origin, key: &str, message: String) -> Self {
        let location = match origin.line {
            Some(line) => format!("{}:{line}", origin.source),
            None => origin.source.clone(),
        };
        Self::Config {
            location,
            key: key.to_string(),
            message,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } | Self::Model(_) => EXIT_CONFIG,
            Self::Io { .. } | Self::Csv { .. } => EXIT_IO,
        }
    }
}
