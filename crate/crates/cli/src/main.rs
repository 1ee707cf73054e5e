//! `mfw`: attractors, Morse decompositions and Lyapunov functions from the
//! command line.

mod analyze;
mod common;
mod lyapunov;
mod simulate;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use common::CliError;

#[derive(Parser)]
#[command(
    name = "mfw",
    version,
    about = "Attractor lattices, Morse decompositions and Lyapunov functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Grid options for ODE systems; ignored by finite ones.
#[derive(Args, Clone, Debug)]
pub struct GridArgs {
    /// Per-axis subdivision exponent.
    #[arg(long)]
    pub depth: Option<u32>,
    /// Time step of the discretized map.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Enclosure inflation in cell widths.
    #[arg(long, default_value_t = 1.0)]
    pub bloat: f64,
    /// Sample points per axis and cell.
    #[arg(long, default_value_t = 3)]
    pub samples: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Build the transition system and write the attractor lattice, Morse
    /// decomposition and verification report.
    Analyze {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// A chain strategy name or a JSON file listing the chain attractors.
        #[arg(long, default_value = "sinks-first")]
        chain: String,
        /// Omit the timing block so that reports are byte-identical.
        #[arg(long)]
        reproducible: bool,
    },
    /// Tabulate the Lyapunov function of one attractor over its basin.
    Lyapunov {
        #[arg(long)]
        spec: PathBuf,
        /// Index into attractors.json.
        #[arg(long)]
        attractor_id: usize,
        #[arg(long)]
        out: PathBuf,
        /// Truncation time of the integral.
        #[arg(long)]
        tmax: Option<f64>,
        /// Integrator step.
        #[arg(long)]
        dt: Option<f64>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Run the property suite on a system and/or on seeded random systems.
    Verify {
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Number of random digraph and map seeds.
        #[arg(long)]
        seeds: Option<u64>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Print a trajectory as CSV.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        /// Comma-separated coordinates, or a state name for finite systems.
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        /// Final time (number of steps for finite systems).
        #[arg(long)]
        t: f64,
        /// Integrator step.
        #[arg(long)]
        dt: Option<f64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze {
            spec,
            out,
            grid,
            chain,
            reproducible,
        } => analyze::run(&spec, &out, &grid, &chain, reproducible),
        Command::Lyapunov {
            spec,
            attractor_id,
            out,
            tmax,
            dt,
            grid,
        } => lyapunov::run(&spec, attractor_id, &out, tmax, dt, &grid),
        Command::Verify { spec, seeds, grid } => verify::run(spec.as_deref(), seeds, &grid),
        Command::Simulate { spec, x0, t, dt } => simulate::run(&spec, &x0, t, dt),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
