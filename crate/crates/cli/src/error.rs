use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("runtime failure: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, action: &str, source: std::io::Error) -> Self {
        let path = path.into();
        CliError::Io { context: format!("cannot {action} {}", path.display()), source }
    }

    /// Process exit code: 1 for bad configuration, 2 for everything at run time.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io { .. } | CliError::Runtime(_) => 2,
        }
    }
}

impl From<plasmonium_core::Error> for CliError {
    fn from(e: plasmonium_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
