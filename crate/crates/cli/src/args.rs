use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use vaxstock_core::simulate::{DEFAULT_SEED, DEFAULT_TRIALS};

#[derive(Debug, Parser)]
#[command(
    name = "vaxstock",
    version,
    about = "Initial vaccine stock for a single-wave campaign"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Relative initial stock ε(n, p) for n deliveries and probability p
    Epsilon(EpsilonArgs),
    /// Fit the arctan demand curve to a country's cumulative series
    Fit(FitArgs),
    /// Initial stock, lot size and purchase schedule
    Plan(PlanArgs),
    /// Monte Carlo estimate of the non-shortage probability of a plan
    Simulate(SimulateArgs),
    /// Non-shortage probability over a range of lot sizes
    Sweep(SweepArgs),
    /// Re-run the command recorded in a manifest
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct OutputArgs {
    /// Write machine-readable JSON here
    #[arg(long)]
    pub json_out: Option<PathBuf>,
    /// Write CSV here
    #[arg(long)]
    pub csv_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TRIALS, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Round delivery times up to whole days
    #[arg(long)]
    pub day_rounding: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EpsilonArgs {
    /// Number of deliveries
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    /// Required non-shortage probability, in (0, 1)
    #[arg(long)]
    pub p: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// OWID-style CSV file
    #[arg(long)]
    pub csv: PathBuf,
    /// Location label to select
    #[arg(long)]
    pub country: String,
    #[arg(long, default_value = "location")]
    pub location_column: String,
    #[arg(long, default_value = "date")]
    pub date_column: String,
    #[arg(long, default_value = "total_vaccinations")]
    pub value_column: String,
    /// Write day, observed and fitted values for plotting
    #[arg(long)]
    pub emit_curve: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PlanArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long)]
    pub p: f64,
    /// Total demand; 1 means the whole (vaccinated) population
    #[arg(long, default_value_t = 1.0)]
    pub demand: f64,
    /// Population size, rescales the demand to doses
    #[arg(long)]
    pub population: Option<f64>,
    /// Fit JSON; adds the horizon and nominal delivery days
    #[arg(long)]
    pub fit: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(long)]
    pub fit: PathBuf,
    /// Override the plan's lot size
    #[arg(long)]
    pub lot: Option<f64>,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(long)]
    pub fit: PathBuf,
    #[arg(long)]
    pub lot_low: f64,
    #[arg(long)]
    pub lot_high: f64,
    #[arg(long)]
    pub lot_step: f64,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run
    pub manifest: PathBuf,
    /// Redirect the JSON output
    #[arg(long)]
    pub json_out: Option<PathBuf>,
    /// Redirect the CSV output
    #[arg(long)]
    pub csv_out: Option<PathBuf>,
    /// Redirect the fitted-curve output of a `fit` run
    #[arg(long)]
    pub emit_curve: Option<PathBuf>,
}
