//! `rebal` — experiment driver for the two-asset tabular-RL backtester.
//!
//! Subcommands:
//! - `run` executes an experiment (or suite) from a TOML config against a
//!   CSV pair or a synthetic market, writing plot-ready CSVs and a run
//!   manifest
//! - `validate` parses and cross-checks a config without executing it
//! - `inspect-qtable` summarizes a serialized Q-table
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal
//! invariant violation.

mod inspect;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rebal_core::ErrorClass;

#[derive(Parser)]
#[command(name = "rebal", version, about = "Two-asset allocation backtests with tabular RL")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment or suite and write its artifacts
    Run(run::RunArgs),
    /// Parse and cross-check a config without running it
    Validate {
        /// Experiment/suite config: a path or `preset:<name>`
        #[arg(long)]
        config: String,
    },
    /// Print a human-readable summary of a serialized Q-table
    InspectQtable {
        /// Path to a Q-table CSV written by this tool
        path: PathBuf,
    },
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Config => 2,
        ErrorClass::Data => 3,
        ErrorClass::Internal => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run::cmd_run(args),
        Command::Validate { config } => run::cmd_validate(&config),
        Command::InspectQtable { path } => inspect::cmd_inspect(&path),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(err.class()))
        }
    }
}
