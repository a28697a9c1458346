use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hamgen::effham::Order;

use crate::{Exact, Precision};

#[derive(Debug, Parser)]
#[command(name = "hamgen", version, about = "Generate and run high-order symplectic integrators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a kernel for a model file and print term statistics.
    Generate(GenerateArgs),
    /// Integrate a model file from one initial state.
    Run(RunArgs),
    /// Maximum energy error over a horizon for each (order, τ).
    ScanTau(ScanTauArgs),
    /// Global error of the anharmonic oscillator against its exact solution.
    GlobalError(GlobalErrorArgs),
    /// Global error of a seeded coupled-oscillator chain.
    Coupled(CoupledArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value = "8")]
    pub maxorder: Order,
    /// Write a standalone solver in this language (`rust`).
    #[arg(long)]
    pub emit: Option<String>,
    /// Path of the emitted source; defaults to `<model name>.rs`.
    #[arg(long, requires = "emit")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Integration {
    /// Step size, as a decimal or fraction.
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Exact,
    #[arg(long, default_value = "8")]
    pub order: Order,
    /// Push tolerance; 1e-12 for double and 1e-20 for extended by default.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value = "double")]
    pub precision: Precision,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub integration: Integration,
    #[arg(long)]
    pub n_steps: usize,
    /// `q… p…`, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub initial_state: Vec<Exact>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub params: Vec<Exact>,
    #[arg(long, default_value = "1")]
    pub record_every: usize,
    /// Trajectory CSV; the histogram goes to `<stem>.histogram.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScanTauArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "2,4,6,8")]
    pub orders: Vec<Order>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub taus: Vec<Exact>,
    #[arg(long)]
    pub horizon: Exact,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub initial_state: Vec<Exact>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub params: Vec<Exact>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value = "double")]
    pub precision: Precision,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GlobalErrorArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Exact,
    #[arg(long, allow_hyphen_values = true)]
    pub q0: Exact,
    #[arg(long, value_delimiter = ',', default_value = "2,4,6")]
    pub orders: Vec<Order>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub taus: Vec<Exact>,
    #[arg(long)]
    pub horizon: Exact,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value = "double")]
    pub precision: Precision,
    #[arg(long, default_value = "1")]
    pub record_every: usize,
    /// Error CSV; fitted constants go to `<stem>.fit.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CoupledArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub integration: Integration,
    #[arg(long)]
    pub horizon: Exact,
    #[arg(long, default_value = "1")]
    pub record_every: usize,
    /// Error CSV; the growth fit goes to `<stem>.fit.csv`.
    #[arg(long)]
    pub out: PathBuf,
}
