//! Command-line front end for the tagchain toolkit.
//!
//! Four subcommands cover the workflow end to end: `check` evaluates a
//! property file against a model, `rfid-sweep` builds the fleet chain across
//! tag populations and writes the result series as CSV, `simulate`
//! cross-checks the chain against the discrete-event simulator, and
//! `protocol-demo` traces a single authentication session.
//!
//! Exit codes: 0 on success, 1 when a property threshold, comparison, or
//! authentication fails, 2 for usage and parse errors, 3 for numerical or
//! state-space limits.

mod check;
mod demo;
mod input;
mod simulate;
mod sweep;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// A failed command, split by the exit status it maps to: `Input` is 2
/// (unreadable or unparsable files, bad flag values), `Limit` is 3
/// (state-space caps, convergence, unsupported chain structure).
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Limit(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Limit(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Limit(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "tagchain",
    version,
    about = "Markov-chain analysis of an RFID authentication fleet"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate each property in a file against a model file.
    Check(check::CheckArgs),
    /// Build the fleet chain across populations and write figure CSVs.
    RfidSweep(sweep::SweepArgs),
    /// Compare chain predictions against the discrete-event simulator.
    Simulate(simulate::SimulateArgs),
    /// Run one authentication session and print its transcript.
    ProtocolDemo(demo::DemoArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Check(args) => check::run(&args),
        Command::RfidSweep(args) => sweep::run(&args),
        Command::Simulate(args) => simulate::run(&args),
        Command::ProtocolDemo(args) => demo::run(&args),
    };
    match outcome {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
