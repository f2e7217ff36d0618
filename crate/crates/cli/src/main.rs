//! `hambreak`: simulate behavioural breaks, analyse crash data, and match
//! simulated setups against an observed pattern.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid input.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hambreak::empirical::BpdSide;

use crate::config::Grid;

/// Error tagged with the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad config, schema or input data.
    Invalid(anyhow::Error),
    /// Anything that went wrong after the inputs were accepted.
    Runtime(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Invalid(e) | Failure::Runtime(e) => e,
        }
    }
}

/// Classify a library error: input and config problems are invalid input,
/// the rest are runtime failures.
impl From<hambreak::Error> for Failure {
    fn from(e: hambreak::Error) -> Self {
        use hambreak::Error as E;
        match e {
            E::InvalidConfig(_)
            | E::InvalidBreak(_)
            | E::NothingToImitate(_)
            | E::Malformed { .. }
            | E::Duplicate { .. }
            | E::Csv(_)
            | E::Empty => Failure::Invalid(e.into()),
            _ => Failure::Runtime(e.into()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hambreak", version, about, propagate_version = true)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment config (TOML); flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Master simulation seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Seed for the permutation tests.
    #[arg(long, global = true)]
    perm_seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = "HAMBREAK_OUT", value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run Monte Carlo batches and write samples, report and manifest.
    Simulate(SimulateArgs),
    /// Before/after statistics for crash events in daily price data.
    Analyze(AnalyzeArgs),
    /// Rank simulated setups against an empirical or simulated pattern.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Setup name, e.g. `none`, `herding`, `sentiment+bias`,
    /// `overconfidence-trend`, or a comma-joined combination. Repeatable.
    #[arg(long, value_name = "NAME", conflicts_with = "grid")]
    pub setup: Vec<String>,
    /// Predefined setup grid.
    #[arg(long, value_enum)]
    pub grid: Option<Grid>,
    /// Intensity of choice; repeat for a beta axis.
    #[arg(long)]
    pub beta: Vec<f64>,
    /// Break intensity as a fraction of the range maximum, in (0, 1];
    /// repeat for an intensity axis.
    #[arg(long, value_name = "LEVEL")]
    pub intensity: Vec<f64>,
    /// Runs per cell.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Permutations per Cramer-von Mises test (>= 99).
    #[arg(long)]
    pub n_perm: Option<usize>,
    /// Skip samples.csv.
    #[arg(long)]
    pub no_samples: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Long-format price CSV with `date,ticker,close` columns.
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
    /// Events file with `[[event]]` tables.
    #[arg(long, value_name = "FILE")]
    pub events: Option<PathBuf>,
    /// Window side the break day's own difference belongs to.
    #[arg(long, value_enum)]
    pub bpd_side: Option<Side>,
    /// Trading days on each side of the break (overrides every event).
    #[arg(long, value_name = "DAYS")]
    pub window_days: Option<usize>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum Side {
    Before,
    After,
}

impl From<Side> for BpdSide {
    fn from(s: Side) -> Self {
        match s {
            Side::Before => BpdSide::Before,
            Side::After => BpdSide::After,
        }
    }
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Simulation report (`report.json` from `simulate`).
    #[arg(long, value_name = "FILE")]
    pub sim: PathBuf,
    /// Empirical report (`empirical.json` from `analyze`). Without it the
    /// built-in DJIA crash pattern is the target.
    #[arg(long, value_name = "FILE", conflicts_with = "target_setup")]
    pub empirical: Option<PathBuf>,
    /// Use this row of the simulation report as the target instead.
    #[arg(long, value_name = "SETUP")]
    pub target_setup: Option<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = commands::run_in_pool(cli.common.threads, || match &cli.command {
        Command::Simulate(a) => commands::simulate(&cli.common, a),
        Command::Analyze(a) => commands::analyze(&cli.common, a),
        Command::Compare(a) => commands::compare(&cli.common, a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
