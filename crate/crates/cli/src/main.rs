//! `qkernel`: reproducible bandwidth experiments for quantum kernels.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::{CommonArgs, ExperimentConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] qkernel_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Parser, Debug)]
#[command(name = "qkernel", version, about = "Quantum kernel bandwidth experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analytic tensor levels and empirical Mercer spectra per bandwidth
    Spectrum(CommonArgs),
    /// Theory and Monte Carlo KRR learning curves per bandwidth
    LearningCurve(CommonArgs),
    /// Cross-validated bandwidth selection, optionally across several n
    Tune(CommonArgs),
    /// Gram matrix of sampled or loaded data (csv, json or binary)
    Gram(CommonArgs),
    /// Analytic and empirical purity per bandwidth
    Purity(CommonArgs),
    /// Analytic versus Monte Carlo Haar covariance spectrum
    HaarCheck(CommonArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, args) = match &cli.command {
        Command::Spectrum(a) => ("spectrum", a),
        Command::LearningCurve(a) => ("learning-curve", a),
        Command::Tune(a) => ("tune", a),
        Command::Gram(a) => ("gram", a),
        Command::Purity(a) => ("purity", a),
        Command::HaarCheck(a) => ("haar-check", a),
    };
    let cfg = ExperimentConfig::resolve(name, args)?;
    if let Some(t) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot size thread pool: {e}")))?;
    }
    match cli.command {
        Command::Spectrum(_) => commands::spectrum(&cfg),
        Command::LearningCurve(_) => commands::learning_curve(&cfg),
        Command::Tune(_) => commands::tune(&cfg),
        Command::Gram(_) => commands::gram(&cfg),
        Command::Purity(_) => commands::purity(&cfg),
        Command::HaarCheck(_) => commands::haar_check(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ CliError::Config(_)) => {
            eprintln!("qkernel: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("qkernel: {e}");
            ExitCode::FAILURE
        }
    }
}
