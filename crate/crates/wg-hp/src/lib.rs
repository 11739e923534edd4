//! Command-line front end for the hp weak Galerkin solver: configuration,
//! CSV and SVG output, and the `solve`, `convergence` and `check` commands.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod svg;

use clap::Parser;

use crate::config::Cli;
use crate::error::exit;

/// Parses `args`, runs the command and returns the exit code. Errors are
/// reported on standard error.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::SUCCESS };
        }
    };
    match config::resolve(&cli.command).and_then(|cfg| run::run(&cfg)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
