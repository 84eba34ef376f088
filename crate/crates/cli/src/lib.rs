//! Command-line front end of the phonon-laser toolkit.
//!
//! Every subcommand is deterministic given its flags. Floating-point output
//! carries nine significant digits and JSON reports a `schema_version`.

use std::io::Write;

use thiserror::Error;

pub mod analytics;
pub mod args;
pub mod commands;
pub mod output;
pub mod sweep;

pub use args::{Cli, Command};

/// Exit code for invalid flags or configuration.
pub const EXIT_USAGE: u8 = 2;
/// Exit code for truncation or solver convergence failures.
pub const EXIT_TRUNCATION: u8 = 3;
/// Exit code for I/O failures.
pub const EXIT_IO: u8 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("truncation failure: {0}")]
    Truncation(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Truncation(_) | CliError::Convergence(_) => EXIT_TRUNCATION,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

/// Runs a parsed command, writing results to `stdout` (or `--out`) and
/// diagnostics to `stderr`.
pub fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    use args::merge_config;
    match cli.command {
        Command::Steady(a) => commands::steady(merge_config(a)?, stdout, stderr),
        Command::Sweep(a) => commands::sweep(merge_config(a)?, stdout),
        Command::Wigner(a) => commands::wigner_cmd(merge_config(a)?, stdout, stderr),
        Command::Sensing(a) => commands::sensing(merge_config(a)?, stdout),
        Command::Meanfield(a) => commands::meanfield(merge_config(a)?, stdout),
    }
}
