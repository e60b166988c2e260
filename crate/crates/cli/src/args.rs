use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qbox_core::BoundaryKind;

#[derive(Debug, Parser)]
#[command(name = "qbox", version, about = "Particle in a one-dimensional box with a linear Stark field")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lowest eigenstates at one field strength.
    Solve(SolveArgs),
    /// ⟨ξ⟩_k and 4β_k/π² over a range of field strengths.
    Scan(ScanArgs),
    /// Run the invariant suites and report each check.
    Verify(VerifyArgs),
    /// Spectral evolution of an initial state read from CSV.
    Evolve(EvolveArgs),
    /// Boundary slopes and wall-force balance for several field strengths.
    Table(TableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Bc {
    /// confinement, ψ(±1) = 0
    C,
    /// periodic
    P,
    /// vanishing derivative, ψ′(±1) = 0
    V,
}

impl From<Bc> for BoundaryKind {
    fn from(b: Bc) -> Self {
        match b {
            Bc::C => BoundaryKind::Confinement,
            Bc::P => BoundaryKind::Periodic,
            Bc::V => BoundaryKind::VanishingDerivative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Number of grid points (odd).
    #[arg(long, default_value_t = 1001)]
    pub n: usize,
    /// Finite-difference order (even).
    #[arg(long, default_value_t = 8)]
    pub order: usize,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = Bc::C)]
    pub bc: Bc,
    #[arg(long, default_value_t = 4)]
    pub states: usize,
    /// Tabulated potential, CSV with columns xi,V on the exact grid.
    #[arg(long, conflicts_with = "alpha")]
    pub potential: Option<PathBuf>,
    /// Physical scales "mass,charge,field,half_length" in SI units; adds
    /// dimensional energies and wall forces.
    #[arg(long)]
    pub scales: Option<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = 100.0, allow_hyphen_values = true)]
    pub alpha_max: f64,
    #[arg(long, default_value_t = 201)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = Bc::C)]
    pub bc: Bc,
    #[arg(long, default_value_t = 4)]
    pub states: usize,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Field strength of the static checks.
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Random expansions per boundary family.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Report file (JSON); standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    /// Initial state, CSV with columns xi,re,im on the exact grid.
    #[arg(long)]
    pub initial: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, conflicts_with = "alpha")]
    pub potential: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Bc::C)]
    pub bc: Bc,
    /// Basis size R.
    #[arg(long, default_value_t = 8)]
    pub states: usize,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub sigma: u8,
    #[arg(long, default_value_t = 10.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 101)]
    pub t_steps: usize,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [10.0, 100.0], allow_hyphen_values = true)]
    pub alpha: Vec<f64>,
    #[arg(long, default_value_t = 4)]
    pub states: usize,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub sigma: u8,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}
