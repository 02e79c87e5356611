//! Near-future churn and win-back prediction for telco subscribers.
//!
//! The crate covers the whole batch pipeline: a relational telco schema with
//! a seeded synthetic generator ([`telco`]), windowed feature extraction keyed
//! by billing account ([`features`]), class rebalancing ([`rebalance`]),
//! tree-based learners including alternating decision trees ([`learners`]),
//! stratified cross-validation and reporting ([`evaluation`]) and text model
//! formats ([`model_io`]).

pub mod calendar;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod learners;
pub mod model_io;
pub mod rebalance;
pub mod telco;

pub use calendar::{MonthRange, YearMonth};
pub use evaluation::{ConfusionMatrix, EvalReport, FeatureScore};
pub use features::{FeatureDef, FeatureKind, FeatureMatrix, Row, Task, Value, WindowSpec};
pub use learners::{AdTreeModel, Algorithm, FittedModel, LearnerSpec, Model, Prediction};
pub use telco::{GeneratorConfig, TelcoDataset};
