//! Experiment runner: prepares features, trains standard and uploading QCNNs,
//! and writes per-epoch metric tables.
//!
//! Every command reads an [`ExperimentConfig`]; see [`config`] for the keys.
//! Outputs are written atomically into `out_dir`:
//!
//! - `prepare`: `features/train.qcf`, `features/test.qcf`, `features/summary.json`
//! - `train`: `results.csv`, `manifest.json`
//! - `compare`: `results.csv`, `comparison.csv`, `manifest.json`
//! - `gradcheck`: `gradcheck.txt`
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 failed gradient check.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use commands::{
    cmd_compare, cmd_gradcheck, cmd_prepare, cmd_train, gradcheck_with, load_features, prepare, GradcheckReport,
    ModelRun, PreparedSummary, RunSummary,
};
pub use config::{ExperimentConfig, Task, Uploading};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error("check failed: {0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Check(_) => 3,
        }
    }
}

impl From<qcnn::data::DataError> for CliError {
    fn from(e: qcnn::data::DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<qcnn::train::TrainError> for CliError {
    fn from(e: qcnn::train::TrainError) -> Self {
        match e {
            qcnn::train::TrainError::Config(msg) => CliError::Config(msg),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<qcnn::model::ModelError> for CliError {
    fn from(e: qcnn::model::ModelError) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "qcnn-cli", version, about = "QCNN experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Config file (`key = value` text or a previous manifest.json).
    #[arg(long)]
    config: PathBuf,
    /// Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `out_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides any key, e.g. `--set epochs=2`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build and cache train/test feature matrices.
    Prepare(Common),
    /// Train every configured model and write results.csv.
    Train(Common),
    /// Train with and without uploading on the same split and seed.
    Compare(Common),
    /// Check the SPSB estimator against finite differences.
    Gradcheck(Common),
}

fn resolve(common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut config = ExperimentConfig::load(&common.config)?;
    for item in &common.overrides {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{item}`")))?;
        config.set(k.trim(), v.trim())?;
    }
    if let Some(seed) = common.seed {
        config.train.seed = seed;
    }
    if let Some(out) = &common.out {
        config.out_dir = out.clone();
    }
    config.validate()?;
    Ok(config)
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Prepare(c) => {
            let summary = cmd_prepare(&resolve(&c)?)?;
            println!("{summary}");
        }
        Command::Train(c) => {
            let run = cmd_train(&resolve(&c)?)?;
            print!("{}", run.csv);
        }
        Command::Compare(c) => {
            let (_, comparison) = cmd_compare(&resolve(&c)?)?;
            print!("{comparison}");
        }
        Command::Gradcheck(c) => {
            let report = cmd_gradcheck(&resolve(&c)?)?;
            print!("{report}");
            if !report.passed {
                return Err(CliError::Check(format!(
                    "relative error {:.4} exceeds {}",
                    report.relative_error, report.tolerance
                )));
            }
        }
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
