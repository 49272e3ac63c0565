//! Command-line front end: argument parsing, file formats and report writers.

pub mod args;
pub mod commands;
pub mod error;
pub mod gridfile;
pub mod output;
pub mod testfn;
pub mod verify;

use clap::Parser;

use crate::error::{EXIT_OK, EXIT_USAGE};

/// Parses `argv`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
