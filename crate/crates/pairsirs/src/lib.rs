//! Command line, configuration and file formats for [`pairsirs_core`].
//!
//! The binary is a thin wrapper around [`execute`]; everything it does is
//! also reachable from Rust through [`config::Cli`] and [`commands::run`].

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

pub use commands::{ensemble_parallel, interval_parallel, sweep_parallel, Outcome};
pub use config::{Cli, Resolved};
pub use error::CliError;

/// Resolve the configuration, then run the command. Usage errors are raised
/// before any file is created.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let resolved = cli.resolve()?;
    commands::run(&resolved)
}
