use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use srl_cli::commands::{self, RunArgs};

/// Moment simulator and compensation planner for wearable robotic limbs.
#[derive(Parser)]
#[command(name = "srl-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its time series as CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        no_compensation: bool,
        /// Replace random search with a grid of this many points per limb.
        #[arg(long, value_name = "GRID_POINTS")]
        oracle: Option<usize>,
    },
    /// Run a scenario with and without compensation and report the reduction.
    Compare {
        #[arg(long, required_unless_present = "all", conflicts_with = "all")]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        /// Compare the bundled cases instead of a config file.
        #[arg(long)]
        all: bool,
        /// With --all, also write one CSV per case into this directory.
        #[arg(long, requires = "all")]
        out_dir: Option<PathBuf>,
    },
    /// Check random search against a dense grid on the bundled one-limb case.
    OracleCheck {
        #[arg(long, default_value_t = 10_001)]
        grid_points: usize,
        #[arg(long, default_value_t = 5)]
        stride: usize,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5,6,7,8,9")]
        seeds: Vec<u64>,
    },
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            no_compensation,
            oracle,
        } => {
            let text = commands::cmd_run(&RunArgs {
                config,
                seed,
                out,
                no_compensation,
                oracle,
            })?;
            print!("{text}");
        }
        Command::Compare {
            config,
            seed,
            all,
            out_dir,
        } => {
            let text = match config {
                Some(path) if !all => commands::cmd_compare(&path, seed)?,
                _ => commands::cmd_compare_all(seed, out_dir.as_deref())?,
            };
            print!("{text}");
        }
        Command::OracleCheck {
            grid_points,
            stride,
            seeds,
        } => {
            let check = commands::cmd_oracle_check(&seeds, grid_points, stride)?;
            print!("{}", check.report);
            if !check.passed {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
