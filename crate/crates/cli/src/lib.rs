//! File formats, run configuration and subcommands for the `sealedbottle`
//! command-line tool.

pub mod commands;
pub mod config;
pub mod formats;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad arguments or parameters.
    #[error("{0}")]
    Usage(String),
    #[error("config error {0}")]
    Config(String),
    /// Unreadable or malformed input files.
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Exit status for a checked property that did not hold.
pub const EXIT_VIOLATION: u8 = 1;
/// Exit status for usage, configuration and input errors.
pub const EXIT_USAGE: u8 = 2;
