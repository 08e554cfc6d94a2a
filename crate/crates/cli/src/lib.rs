//! Command-line front end: scenario ingestion, the four commands
//! (trace, sweep, scan, fit), and artifact persistence.

pub mod commands;
pub mod output;
pub mod plot;
pub mod scenario;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use commands::{execute, CommandKind, RunContext};
use scenario::parse_scenario;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad inputs: scenario, arguments, observed data. Exit code 1.
    #[error("{0}")]
    Validation(String),
    /// Failures past validation: simulation or I/O. Exit code 2.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "omri", version, about = "Pulsed-optomechanics Ramsey spectrum toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Time trace of the sideband amplitudes at the grid-center detuning.
    Trace(CommonArgs),
    /// Gated spectrum over the detuning grid plus fringe extraction.
    Sweep(CommonArgs),
    /// Spectra and fringe observables along the scenario's [scan] axis.
    Scan(CommonArgs),
    /// Fit the scenario's [fit] free parameters to an observed spectrum.
    Fit(CommonArgs),
}

#[derive(Args, Debug)]
pub struct CommonArgs {
    /// Scenario TOML path.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output directory (created if absent).
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for sweeps (0 = library default). Results are
    /// byte-identical for any value.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// RNG seed (fit simplex initialization).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Observed spectrum CSV (fit only).
    #[arg(long)]
    pub observed: Option<PathBuf>,
}

/// Parses the scenario, runs the command, writes artifacts. Returns the
/// written paths for reporting.
pub fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let (kind, args) = match &cli.command {
        Command::Trace(a) => (CommandKind::Trace, a),
        Command::Sweep(a) => (CommandKind::Sweep, a),
        Command::Scan(a) => (CommandKind::Scan, a),
        Command::Fit(a) => (CommandKind::Fit, a),
    };
    let text = std::fs::read_to_string(&args.scenario)
        .map_err(|e| CliError::Validation(format!("reading {}: {e}", args.scenario.display())))?;
    let scenario = parse_scenario(&text)?;
    let ctx = RunContext {
        command: kind,
        scenario,
        out_dir: args.out.clone(),
        workers: args.workers,
        seed: args.seed,
        observed: args.observed.clone(),
    };
    execute(&ctx)
}
