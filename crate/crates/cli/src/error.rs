use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse {origin}: {message}")]
    Parse { origin: String, message: String },

    #[error("{0}")]
    Config(String),

    #[error("unknown preset `{0}` (run `leaky-staging presets` for the list)")]
    UnknownPreset(String),

    #[error(transparent)]
    Solver(#[from] leaky_staging::Error),
}

impl CliError {
    /// Stable machine-readable code printed with every error.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Read { .. } => "read_failed",
            CliError::Write { .. } => "write_failed",
            CliError::Parse { .. } => "parse_failed",
            CliError::Config(_) => "invalid_config",
            CliError::UnknownPreset(_) => "unknown_preset",
            CliError::Solver(e) => e.code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}
