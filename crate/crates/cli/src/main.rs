use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    recur_cli::main_with(&recur_cli::Cli::parse())
}
