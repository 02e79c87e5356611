//! Flat `key = value` pipeline configuration. `#` starts a comment line.
//! Relative paths resolve against the config file's directory.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use churnforge::learners::{Algorithm, LearnerSpec};
use churnforge::telco::GeneratorConfig;

use crate::error::CliError;
use crate::task::TaskSpec;

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub task: TaskSpec,
    /// Master seed for generation, sampling, folds and learners.
    pub seed: u64,
    pub generator: GeneratorConfig,
    pub learners: Vec<Algorithm>,
    /// Hyperparameters shared by every learner in the list.
    pub hyper: LearnerSpec,
    pub folds: usize,
    pub top_n: usize,
    pub rank_top_n: usize,
    /// Learner for `train-final` when no comparison result exists.
    pub final_learner: Algorithm,
    /// Test-period labels for optional holdout scoring.
    pub holdout_labels: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("data"),
            out_dir: PathBuf::from("out"),
            task: TaskSpec::new(1).expect("problem 1 exists"),
            seed: 42,
            generator: GeneratorConfig::default(),
            learners: Algorithm::ALL.to_vec(),
            hyper: LearnerSpec::new(Algorithm::Cart),
            folds: 10,
            top_n: 100,
            rank_top_n: 15,
            final_learner: Algorithm::Cart,
            holdout_labels: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse {value:?}")))
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse_str(&text, base).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Parses config text; relative paths are joined onto `base`.
    pub fn parse_str(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut c = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(CliError::Config(format!("line {}: {key} set twice", n + 1)));
            }
            c.set(key, value, base)
                .map_err(|e| CliError::Config(format!("line {}: {e}", n + 1)))?;
        }
        c.validate()?;
        Ok(c)
    }

    fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<(), CliError> {
        let path = |v: &str| base.join(v);
        match key {
            "data_dir" => self.data_dir = path(value),
            "out_dir" => self.out_dir = path(value),
            "task" => self.set_task(parse(key, value)?)?,
            "seed" => self.seed = parse(key, value)?,
            "n_consumers" => self.generator.n_consumers = parse(key, value)?,
            "n_smes" => self.generator.n_smes = parse(key, value)?,
            "churn_rate" => self.generator.churn_rate = parse(key, value)?,
            "winback_rate" => self.generator.winback_rate = parse(key, value)?,
            "signal_strength" => self.generator.signal_strength = parse(key, value)?,
            "months_covered" => self.generator.months_covered = parse(key, value)?,
            "learners" => {
                self.learners = value
                    .split(',')
                    .map(|s| s.trim().parse::<Algorithm>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| CliError::Config(e.to_string()))?
            }
            "final_learner" => {
                self.final_learner = value
                    .parse()
                    .map_err(|e: churnforge::error::LearnError| CliError::Config(e.to_string()))?
            }
            "max_depth" => self.hyper.max_depth = parse(key, value)?,
            "min_leaf" => self.hyper.min_leaf = parse(key, value)?,
            "n_trees" => self.hyper.n_trees = parse(key, value)?,
            "n_boost_rounds" => self.hyper.n_boost_rounds = parse(key, value)?,
            "features_per_split" => self.hyper.features_per_split = Some(parse(key, value)?),
            "bootstrap" => self.hyper.bootstrap = parse(key, value)?,
            "folds" => self.folds = parse(key, value)?,
            "top_n" => self.top_n = parse(key, value)?,
            "rank_top_n" => self.rank_top_n = parse(key, value)?,
            "holdout_labels" => self.holdout_labels = Some(path(value)),
            _ => return Err(CliError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn set_task(&mut self, id: u8) -> Result<(), CliError> {
        self.task = TaskSpec::new(id).ok_or_else(|| CliError::Config(format!("task must be 1..7, got {id}")))?;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.learners.is_empty() {
            return Err(CliError::Config("learners list is empty".into()));
        }
        if self.folds < 2 {
            return Err(CliError::Config("folds must be at least 2".into()));
        }
        self.hyper.validate().map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn generator_config(&self) -> GeneratorConfig {
        GeneratorConfig {
            seed: self.seed,
            ..self.generator.clone()
        }
    }

    pub fn learner_spec(&self, algorithm: Algorithm) -> LearnerSpec {
        LearnerSpec {
            algorithm,
            seed: self.seed,
            ..self.hyper.clone()
        }
    }
}
