//! Command-line front end for `blockcorr`.
//!
//! Every subcommand writes CSV with `#`-prefixed metadata lines that echo
//! the resolved parameters. Parameters come from built-in defaults, then a
//! `key=value` config file, then flags.

pub mod args;
pub mod commands;
pub mod config;
mod error;
pub mod output;
pub mod resolve;
pub mod sweep;

pub use error::CliError;

use args::{Cli, Command};

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Eval(a) => commands::cmd_eval(a).map(drop),
        Command::Sweep(a) => sweep::cmd_sweep(a).map(drop),
        Command::Validate(a) => commands::cmd_validate(a).map(drop),
        Command::Critical(a) => commands::cmd_critical(a).map(drop),
    }
}
