use std::path::PathBuf;

use thiserror::Error;

/// A value that failed to parse from its text form.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{0}")]
pub struct ParseError(pub String);

#[derive(Debug, Error)]
pub enum DataError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Malformed { path: PathBuf, line: u64, message: String },
    #[error("invalid dataset: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("months {needed} are not covered by the dataset (covered: {covered})")]
    OutsideCoverage { needed: String, covered: String },
    #[error("wrong task for this extraction: {0}")]
    WrongTask(String),
    #[error("feature schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("{0}")]
    Malformed(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum SampleError {
    #[error("rebalancing needs both classes, found only class {0}")]
    SingleClass(u8),
    #[error("rebalancing needs a labeled matrix; row {0} has no label")]
    Unlabeled(String),
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum LearnError {
    #[error("training matrix is empty")]
    EmptyTrainingSet,
    #[error("row {0} has no label")]
    Unlabeled(String),
    #[error("invalid hyperparameter: {0}")]
    InvalidParameter(String),
    #[error("unknown learner {0:?}")]
    UnknownLearner(String),
    #[error("input does not match the model schema: {0}")]
    SchemaMismatch(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("k must be at least 2, got {0}")]
    TooFewFolds(usize),
    #[error("class {class} has {count} rows, fewer than k = {k}")]
    ClassTooSmall { class: u8, count: usize, k: usize },
    #[error("matrix row {0} has no label")]
    Unlabeled(String),
    #[error("no learner produced a usable result")]
    NoUsableResult,
}

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported model file version {found:?} (expected {expected:?})")]
    Version { found: String, expected: String },
    #[error("model file is truncated: {0}")]
    Truncated(String),
    #[error("cannot serialize model: {0}")]
    Invalid(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
