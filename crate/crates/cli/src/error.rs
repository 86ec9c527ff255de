use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown experiment kind {0}")]
    UnknownKind(String),
    #[error("line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{path}: {source}")]
    InFile { path: PathBuf, source: Box<CliError> },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] qsd_core::Error),
}

impl CliError {
    /// Prefixes config errors with the file they came from.
    pub fn in_file(self, path: &Path) -> Self {
        match self {
            e @ CliError::Config { .. } => CliError::InFile { path: path.to_path_buf(), source: Box::new(e) },
            e => e,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
