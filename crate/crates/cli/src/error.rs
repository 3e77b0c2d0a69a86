use std::path::PathBuf;

use nli_core::NliError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("{} model-validity warning(s) escalated by --strict:\n  {}", .0.len(), .0.join("\n  "))]
    Strict(Vec<String>),
}

impl CliError {
    /// 2 for escalated warnings, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Strict(_) => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        CliError::Io { path: path.into(), message: err.to_string() }
    }
}

impl From<NliError> for CliError {
    fn from(e: NliError) -> Self {
        CliError::Config(e.to_string())
    }
}
