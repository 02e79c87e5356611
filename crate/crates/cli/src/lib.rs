//! Command-line pipeline for the seven churn, loyalty and win-back
//! prediction problems: generate data, extract windowed features, compare
//! learners, retrain the best one and rank test subscribers.

pub mod commands;
pub mod config;
pub mod error;
pub mod task;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::PipelineConfig;
pub use error::CliError;
pub use task::{Direction, TaskSpec};

#[derive(Debug, Parser)]
#[command(name = "churnforge", version, about = "Telco churn and win-back prediction pipeline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Flat key=value config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Prediction problem, 1 to 7.
    #[arg(long, global = true)]
    pub task: Option<u8>,
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Rows in the prediction list (or features in the ranking).
    #[arg(long, global = true)]
    pub top_n: Option<usize>,
    /// Output directory (the dataset directory for `generate`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Test-period labels (billing_id,label) for scoring `predict` output.
    #[arg(long, global = true)]
    pub holdout_labels: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Write a synthetic telco dataset.
    Generate,
    /// Build training and test feature matrices for the task.
    Extract,
    /// Cross-validate the configured learners on undersampled data.
    Compare,
    /// Retrain the selected learner on oversampled data and save it.
    TrainFinal,
    /// Score and rank the test matrix.
    Predict,
    /// Rank features by single-split information gain.
    RankFeatures,
}

impl Cli {
    /// Config file settings with command-line overrides applied.
    pub fn resolve_config(&self) -> Result<PipelineConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        if let Some(t) = self.task {
            c.set_task(t)?;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(n) = self.top_n {
            c.top_n = n;
            c.rank_top_n = n;
        }
        if let Some(dir) = &self.out {
            match self.command {
                Command::Generate => c.data_dir = dir.clone(),
                _ => c.out_dir = dir.clone(),
            }
        }
        if let Some(p) = &self.holdout_labels {
            c.holdout_labels = Some(p.clone());
        }
        Ok(c)
    }
}

pub fn run_command(command: Command, config: &PipelineConfig) -> Result<String, CliError> {
    match command {
        Command::Generate => commands::cmd_generate(config),
        Command::Extract => commands::cmd_extract(config),
        Command::Compare => commands::cmd_compare(config),
        Command::TrainFinal => commands::cmd_train_final(config),
        Command::Predict => commands::cmd_predict(config),
        Command::RankFeatures => commands::cmd_rank_features(config),
    }
}

pub fn run(cli: &Cli) -> Result<String, CliError> {
    run_command(cli.command, &cli.resolve_config()?)
}
