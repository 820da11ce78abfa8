//! `rce`: random color erasing over image corpora, branch statistics, and
//! ensemble vote analysis.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O error, 3 data or parse error.

mod apply;
mod ensemble_verify;
mod stats;

use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "rce", version, about = "Random color erasing augmentation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Augment every image under a directory and write a replay manifest.
    Apply(apply::ApplyArgs),
    /// Sweep p_r or p_g and print empirical branch frequencies as CSV.
    Stats(stats::StatsArgs),
    /// Print ensemble errors and check a component substitution.
    EnsembleVerify(ensemble_verify::VerifyArgs),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Data(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Data(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
        }
    }
}

impl From<rce_core::Error> for CliError {
    fn from(e: rce_core::Error) -> Self {
        use rce_core::Error as E;
        let msg = e.to_string();
        match e {
            E::Io { .. } | E::Encode { .. } | E::PartialWrite { .. } => CliError::Io(msg),
            E::Config(_) => CliError::Usage(msg),
            _ => CliError::Data(msg),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let result = match cli.command {
        Command::Apply(args) => apply::run(args),
        Command::Stats(args) => stats::run(args),
        Command::EnsembleVerify(args) => ensemble_verify::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rce: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
