//! `stance`: fetch data, train, evaluate, predict, tune and report.
mod commands;
mod fetch;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stance_core::Error;

/// Configuration error.
const EXIT_CONFIG: u8 = 2;
/// Resource or model file does not match its recorded hash.
const EXIT_RESOURCE: u8 = 3;
/// Training could not complete.
const EXIT_TRAINING: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "stance", version, about = "Cascaded claim/body stance detection")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Run configuration file (required by every command except fetch).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: number of cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Overrides every seed in the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (default: paths.output from the configuration).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Download files and verify their SHA-256 checksums.
    Fetch(commands::FetchArgs),
    /// Load both corpora and write their summaries and stage dataset sizes.
    Prepare(commands::PrepareArgs),
    /// Train the three stages and write a pipeline directory.
    Train,
    /// Score a pipeline directory on the test corpus.
    Evaluate(commands::ModelArgs),
    /// Label a stance file and write it back with a Predicted column.
    Predict(commands::PredictArgs),
    /// Cross-validate one stage over a hyperparameter grid.
    Tune(commands::TuneArgs),
    /// Print a saved report or score an external prediction file.
    Report(commands::ReportArgs),
}

/// Failure with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Config(_) => EXIT_CONFIG,
            Error::ResourceMismatch { .. } => EXIT_RESOURCE,
            _ => 1,
        };
        Failure {
            code,
            error: e.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: 1, error }
    }
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Error::Config(message.into()).into()
    }

    /// Maps errors raised while fitting a model to the training-abort code.
    pub fn training(e: Error) -> Self {
        match e {
            Error::TrainingAborted(_)
            | Error::NonFinite(_)
            | Error::SingleClass { .. }
            | Error::ClassTooSmall { .. } => Failure {
                code: EXIT_TRAINING,
                error: e.into(),
            },
            other => other.into(),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
