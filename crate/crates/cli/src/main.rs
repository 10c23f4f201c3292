//! Spectral diagnostics of embedding matrices from the command line:
//! covariance spectra, recoverable/structural dimension, Mahalanobis
//! separation, subspace stability, zeta-filter calibration, Fisher
//! classification, and seeded Monte-Carlo sweeps.

use clap::{Parser, Subcommand};
use spectral_lab_cli::commands;
use std::process::ExitCode;

const EXIT_CODE_HELP: &str = "Exit codes:
  0  success
  2  I/O error (missing, unreadable, or malformed file)
  3  data-quality error (NaN/Inf entries, too few samples)
  4  contract error (dimension or label mismatch, out-of-range argument)
  5  calibration refused (no recoverable spectral head)
  6  config error (schema violation, unknown key, bad flag value)";

#[derive(Parser)]
#[command(
    name = "spectral-lab",
    version,
    about = "Finite-sample spectral diagnostics and calibration for embedding matrices",
    after_help = EXIT_CODE_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues (and optionally eigenvectors) of a matrix file's covariance.
    Spectrum(commands::spectrum::Args),
    /// Full spectral diagnostics report, label-aware when labels are given.
    Diagnose(commands::diagnose::Args),
    /// Subspace rotation between a reference and a test matrix, with bounds.
    Stability(commands::stability::Args),
    /// Replace a spectrum's noisy tail with a continuous power-law decay.
    #[command(name = "zeta-filter")]
    ZetaFilter(commands::zeta_filter::Args),
    /// Fisher one-vs-rest readout: per-class and macro ROC-AUC.
    Classify(commands::classify::Args),
    /// Seeded Monte-Carlo sweep over sample sizes with plot-ready outputs.
    Simulate(commands::simulate::Args),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Spectrum(args) => commands::spectrum::run(args),
        Command::Diagnose(args) => commands::diagnose::run(args),
        Command::Stability(args) => commands::stability::run(args),
        Command::ZetaFilter(args) => commands::zeta_filter::run(args),
        Command::Classify(args) => commands::classify::run(args),
        Command::Simulate(args) => commands::simulate::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
