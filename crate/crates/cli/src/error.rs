use churnforge::error::{DataError, EvalError, FeatureError, LearnError, ModelIoError, SampleError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("sampling: {0}")]
    Sample(#[from] SampleError),
    #[error("training: {0}")]
    Learn(#[from] LearnError),
    #[error("evaluation: {0}")]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Model(#[from] ModelIoError),
}
