//! Error type of the command-line layer, carrying the process exit code.
//!
//! Exit-code contract: `2` for unreadable or invalid inputs (files, specs,
//! configuration), `3` for solver divergence, `1` for anything else.

use mptv_core::CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable file, malformed spec, or invalid configuration.
    #[error("{0}")]
    Input(String),
    /// The inner solver produced non-finite iterates.
    #[error("{0}")]
    Divergence(String),
    /// Unexpected failure (output write errors and the like).
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn input(msg: impl std::fmt::Display) -> Self {
        CliError::Input(msg.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Divergence(_) => 3,
            CliError::Other(_) => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::Divergence { .. } => CliError::Divergence(err.to_string()),
            _ => CliError::Input(err.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
