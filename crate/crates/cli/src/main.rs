use std::process::ExitCode;

use clap::Parser;
use qbox_cli::{args::Cli, run};

fn main() -> ExitCode {
    run(Cli::parse())
}
