//! `skewsim` command line: simulate, density, validate, pde, rate.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{density, pde, rate, simulate, validate};
use crate::config::merge;
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "skewsim", version, about = "Skew Brownian motion simulation and verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate paths and write them as CSV.
    #[command(allow_negative_numbers = true)]
    Simulate {
        /// TOML file with the same keys as the flags.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        args: config::SimulateArgs,
    },
    /// Evaluate the transition density.
    #[command(allow_negative_numbers = true)]
    Density {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        args: config::DensityArgs,
    },
    /// Run a validation suite; exit status 1 when a check fails.
    #[command(allow_negative_numbers = true)]
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        args: config::ValidateArgs,
    },
    /// Solve the transmission problem and write `t,x,u` as CSV.
    #[command(allow_negative_numbers = true)]
    Pde {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        args: config::PdeArgs,
    },
    /// Convergence rate of embedded walks against a fine reference.
    Rate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        args: config::RateArgs,
    },
}

fn with_pool<T>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("workers: {e}")))?;
    Ok(pool.install(f))
}

/// `Ok(true)` on success or passing validation, `Ok(false)` on a failed check.
fn execute(cmd: Command) -> Result<bool, CliError> {
    match cmd {
        Command::Simulate { config, args } => {
            let r = simulate::resolve(&merge(&args, config.as_deref())?)?;
            with_pool(r.workers, || simulate::run(&r))??;
            Ok(true)
        }
        Command::Density { config, args } => {
            density::run(&density::resolve(&merge(&args, config.as_deref())?)?)?;
            Ok(true)
        }
        Command::Validate { config, args } => {
            let r = validate::resolve(&merge(&args, config.as_deref())?)?;
            with_pool(r.workers, || validate::run(&r))?
        }
        Command::Pde { config, args } => {
            pde::run(&pde::resolve(&merge(&args, config.as_deref())?)?)?;
            Ok(true)
        }
        Command::Rate { config, args } => {
            let r = rate::resolve(&merge(&args, config.as_deref())?)?;
            with_pool(r.workers, || rate::run(&r))?
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("skewsim: {e}");
            ExitCode::from(2)
        }
    }
}
