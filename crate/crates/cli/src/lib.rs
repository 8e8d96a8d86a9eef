//! The `urbent` command line: mine city entities from photo and POI CSVs,
//! generate synthetic datasets, and validate inputs.

pub mod commands;
pub mod config;
pub mod output;

use std::fmt;
use std::path::Path;

/// Process exit status for a failed command.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable config, invalid parameters or input format.
    Config(String),
    /// Reading inputs or writing outputs failed.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub(crate) fn io(path: &Path, err: impl fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
