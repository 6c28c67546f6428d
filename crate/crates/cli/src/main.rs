//! `wavattack`: command-line front end of the wavelength-attack simulator.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "wavattack",
    version,
    about = "Wavelength attack on heterodyne CVQKD: sweeps, solver, session simulation"
)]
struct Cli {
    /// TOML run configuration; built-in defaults when absent.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides `simulation.seed`.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Overrides `output.path`.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate V_B|E and its two terms against T2.
    Sweep(SweepArgs),
    /// Solve the attacking equations for one heterodyne outcome.
    Solve(SolveArgs),
    /// Simulate a session, write the dataset, print the estimation summary.
    Simulate(SimulateArgs),
    /// Evaluate or invert the coupler transmittance.
    Coupler(CouplerArgs),
    /// Print the effective configuration as TOML.
    Config,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    t2_min: Option<f64>,
    #[arg(long)]
    t2_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Eve's x outcome, sqrt(N0) units.
    #[arg(long, allow_hyphen_values = true)]
    xe: f64,
    /// Eve's p outcome, sqrt(N0) units.
    #[arg(long, allow_hyphen_values = true)]
    pe: f64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Overrides `simulation.n_rounds`.
    #[arg(long)]
    rounds: Option<usize>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct CouplerArgs {
    /// Wavelength in µm to evaluate T at.
    #[arg(long)]
    lambda: Option<f64>,
    /// Transmittance to invert over the configured band.
    #[arg(long, allow_hyphen_values = true)]
    transmittance: Option<f64>,
}

/// Failure classes, mapped to the process exit code.
#[derive(Debug)]
pub enum CliError {
    Io(String),
    Config(String),
    Domain(cvqkd_attack::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) | CliError::Config(_) => 2,
            CliError::Domain(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl From<cvqkd_attack::Error> for CliError {
    fn from(e: cvqkd_attack::Error) -> Self {
        CliError::Domain(e)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.simulation.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.output.path = Some(out);
    }
    match cli.command {
        Command::Sweep(a) => {
            cfg.sweep.t2_min = a.t2_min.unwrap_or(cfg.sweep.t2_min);
            cfg.sweep.t2_max = a.t2_max.unwrap_or(cfg.sweep.t2_max);
            cfg.sweep.steps = a.steps.unwrap_or(cfg.sweep.steps);
            commands::sweep(&cfg)
        }
        Command::Solve(a) => commands::solve(&cfg, a.xe, a.pe),
        Command::Simulate(a) => {
            cfg.simulation.n_rounds = a.rounds.unwrap_or(cfg.simulation.n_rounds);
            commands::simulate(&cfg)
        }
        Command::Coupler(a) => match (a.lambda, a.transmittance) {
            (Some(l), _) => commands::coupler_forward(&cfg, l),
            (None, Some(t)) => commands::coupler_inverse(&cfg, t),
            (None, None) => unreachable!("clap enforces one of --lambda/--transmittance"),
        },
        Command::Config => {
            print!("{}", cfg.to_toml());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wavattack: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
