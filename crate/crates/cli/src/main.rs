//! `bouss`: spectra, determinant checks, alpha scans, unique-continuation
//! verdicts and control experiments for the per-mode linearised Boussinesq
//! system in a periodic channel.
//!
//! Exit codes: 0 success, 2 configuration or validation error, 3 numeric or
//! acceptance failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bouss", version, about = "Linearised Boussinesq channel toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Io {
    /// TOML configuration document.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Merged Stokes and Dirichlet spectra per mode.
    Spectra(Io),
    /// Randomised check of the factored boundary determinant.
    Detcheck(Io),
    /// Zeros of the multiplier determinant as a function of alpha.
    ScanAlpha(Io),
    /// Unique-continuation verdict per eigenvalue.
    Verdict(Io),
    /// Truncated boundary-control experiment for one mode.
    Control(Io),
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
            CliError::Io(m) => write!(f, "i/o failure: {m}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, io, run): (&str, &Io, commands::Runner) = match &cli.command {
        Command::Spectra(io) => ("spectra", io, commands::spectra),
        Command::Detcheck(io) => ("detcheck", io, commands::detcheck),
        Command::ScanAlpha(io) => ("scan-alpha", io, commands::scan_alpha),
        Command::Verdict(io) => ("verdict", io, commands::verdict),
        Command::Control(io) => ("control", io, commands::control),
    };
    match commands::execute(name, &io.config, &io.out, run) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bouss {name}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
