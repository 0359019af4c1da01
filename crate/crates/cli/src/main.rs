mod commands;
mod manifest;
mod surface;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::commands::{ExportArgs, GlobalArgs, SearchArgs, VerifyArgs};

/// Numerical experiments on spacelike surfaces in the lightcone of
/// Minkowski space.
#[derive(Debug, Parser)]
#[command(name = "lightcone", version, args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the pointwise identity suite at random sample points.
    Verify(VerifyArgs),
    /// Global integrals, the II_eta area bound and the first eigenvalue.
    Global(GlobalArgs),
    /// Multi-start minimisation of Var(K^eta) over harmonic perturbations.
    Search(SearchArgs),
    /// Dump per-node invariants on the quadrature grid as CSV.
    Export(ExportArgs),
}

/// Why a run stopped; maps onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Some check failed.
    Checks,
    /// Degenerate or non-compact input, or an I/O failure.
    Input(String),
    /// Malformed arguments or configuration.
    Config(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Checks => 2,
            Failure::Input(_) => 3,
            Failure::Config(_) => 4,
        }
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("LIGHTCONE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Config(format!("LIGHTCONE_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(4),
            };
        }
    };
    let result = init_threads().and_then(|()| match cli.command {
        Command::Verify(args) => commands::verify(args),
        Command::Global(args) => commands::global(args),
        Command::Search(args) => commands::search(args),
        Command::Export(args) => commands::export(args),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Checks => eprintln!("error: one or more checks failed"),
                Failure::Input(msg) | Failure::Config(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(f.code())
        }
    }
}
