//! Front end of the `qbox` binary: eigen tables, α-scans, verification
//! suites and spectral trajectories, exported as CSV, JSON or SVG.

pub mod args;
pub mod commands;
mod output;
pub mod svg;
pub mod verify;

use std::fmt;
use std::process::ExitCode;

use args::{Cli, Command};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Usage,
    Solver,
}

/// A command failure together with the exit status it maps to.
#[derive(Debug)]
pub struct CliError {
    pub kind: FailureKind,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn usage(msg: impl fmt::Display) -> Self {
        CliError {
            kind: FailureKind::Usage,
            error: anyhow::anyhow!("{msg}"),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            FailureKind::Usage => EXIT_USAGE,
            FailureKind::Solver => EXIT_SOLVER,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError {
            kind: FailureKind::Solver,
            error: e.into(),
        }
    }
}

/// Whether every required check passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    ChecksFailed,
}

pub type CmdResult = std::result::Result<Outcome, CliError>;

/// Applies `QBOX_THREADS` to the global worker pool.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("QBOX_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::usage(format!("QBOX_THREADS must be a positive integer, got {raw:?}")))?;
    // a pool that already exists (repeated calls in one process) is kept
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

pub fn execute(cli: Cli) -> CmdResult {
    configure_threads()?;
    match cli.command {
        Command::Solve(a) => commands::solve(&a),
        Command::Scan(a) => commands::scan(&a),
        Command::Verify(a) => verify::run(&a),
        Command::Evolve(a) => commands::evolve(&a),
        Command::Table(a) => commands::table(&a),
    }
}

pub fn run(cli: Cli) -> ExitCode {
    match execute(cli) {
        Ok(Outcome::Ok) => ExitCode::from(EXIT_OK),
        Ok(Outcome::ChecksFailed) => ExitCode::from(EXIT_CHECK_FAILURE),
        Err(e) => {
            eprintln!("qbox: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
