//! Command-line front end; the command set lives in [`cli`].

use std::process::ExitCode;

mod cli;

fn main() -> ExitCode {
    cli::run()
}
