//! `fastrfb` command-line driver.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure
//! (non-finite values or a failed verification check).

mod commands;
mod csv;
mod spec;

use std::process::ExitCode;

use clap::Parser;

use spec::Command;

#[derive(Debug, Parser)]
#[command(
    name = "fastrfb",
    version,
    about = "Fast reflected forward-backward solvers, verification suite and experiments",
    after_help = "Exit codes: 0 success, 2 configuration error, 3 numeric failure (NaN or failed check)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numeric(String),
}

impl From<spec::ConfigError> for Failure {
    fn from(e: spec::ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => commands::run(args),
        Command::Table(args) => commands::table(args),
        Command::Verify { common, check, lambda, s } => commands::verify(common, check, lambda, s),
        Command::FigureData { common, figure } => commands::figure_data(common, figure),
        Command::Params(args) => commands::params(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numeric failure: {msg}");
            ExitCode::from(3)
        }
    }
}
