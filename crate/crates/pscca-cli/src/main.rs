//! Batch command-line interface: simulate scenario datasets, fit the model
//! to a pair of count matrices, and run scenario comparisons.

mod commands;
mod config;
mod io;

use clap::{Parser, Subcommand};

use crate::config::{CliError, CompareArgs, FitArgs, SimulateArgs};

#[derive(Parser)]
#[command(
    name = "pscca",
    version,
    about = "Correlation and canonical correlation estimation for sparse count data \
             at the natural-parameter level"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a simulated dataset with known correlation structure.
    Simulate(SimulateArgs),
    /// Fit the model to two count matrices and write posterior summaries.
    Fit(FitArgs),
    /// Compare estimation methods on replicated simulated datasets.
    Compare(CompareArgs),
}

fn init_thread_pool() -> Result<(), CliError> {
    if let Ok(raw) = std::env::var("PSCCA_THREADS") {
        let threads: usize = raw.parse().map_err(|_| {
            CliError::Usage(format!("PSCCA_THREADS must be a positive integer, got '{raw}'"))
        })?;
        if threads == 0 {
            return Err(CliError::Usage("PSCCA_THREADS must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("failed to configure thread pool: {e}")))?;
    }
    Ok(())
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    init_thread_pool()?;
    match cli.command {
        Command::Simulate(args) => commands::simulate(&args.resolve()?),
        Command::Fit(args) => commands::fit(&args.resolve()?),
        Command::Compare(args) => commands::compare(&args.resolve()?),
    }
}

fn main() {
    match run() {
        Ok(()) => {}
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
    }
}
