//! Classifiers behind one contract: `train(matrix, spec)` yields a
//! [`FittedModel`] whose `predict` returns a real score and a class.
//!
//! Class rule: ADTree and AdaBoost predict 1 iff the score is positive;
//! the probability-valued models (trees, Bayes, bagging, forests) predict 1
//! iff the class-1 probability exceeds 0.5. Exact ties go to class 0.

pub mod adtree;
pub mod bayes;
mod condition;
pub(crate) mod data;
pub mod ensemble;
pub(crate) mod split;
pub mod tree;

use std::fmt;
use std::str::FromStr;

pub use adtree::{AdTreeModel, PredictionNode, Splitter};
pub use bayes::{BayesFeature, BayesModel};
pub use condition::{Branch, SplitCondition, Test};
pub use ensemble::{EnsembleKind, EnsembleModel};
pub use tree::{TreeModel, TreeNode};

use crate::error::LearnError;
use crate::features::{FeatureDef, FeatureMatrix, RowRef, SchemaIndex, Value};
use data::TrainSet;
use ensemble::VoteParams;
use tree::GrowParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Stump,
    Cart,
    AdTree,
    NaiveBayes,
    BaggingStump,
    BaggingCart,
    RandomForest,
    AdaBoostStump,
    AdaBoostCart,
}

impl Algorithm {
    pub const ALL: [Algorithm; 9] = [
        Self::Stump,
        Self::Cart,
        Self::AdTree,
        Self::NaiveBayes,
        Self::BaggingStump,
        Self::BaggingCart,
        Self::RandomForest,
        Self::AdaBoostStump,
        Self::AdaBoostCart,
    ];

    /// Identifier used in configs and model files.
    pub fn id(self) -> &'static str {
        match self {
            Self::Stump => "stump",
            Self::Cart => "cart",
            Self::AdTree => "adtree",
            Self::NaiveBayes => "naive_bayes",
            Self::BaggingStump => "bagging_stump",
            Self::BaggingCart => "bagging_cart",
            Self::RandomForest => "random_forest",
            Self::AdaBoostStump => "adaboost_stump",
            Self::AdaBoostCart => "adaboost_cart",
        }
    }

    /// Column heading for report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Self::Stump => "DecisionStump",
            Self::Cart => "SimpleCart",
            Self::AdTree => "ADTree",
            Self::NaiveBayes => "NaiveBayes",
            Self::BaggingStump => "Bagging+DecisionStump",
            Self::BaggingCart => "Bagging+SimpleCart",
            Self::RandomForest => "RandomForest",
            Self::AdaBoostStump => "AdaBoost+DecisionStump",
            Self::AdaBoostCart => "AdaBoost+SimpleCart",
        }
    }

    /// Whether the algorithm is a tree or tree ensemble.
    pub fn is_tree_based(self) -> bool {
        self != Self::NaiveBayes
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = LearnError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| LearnError::UnknownLearner(s.to_string()))
    }
}

/// Algorithm plus hyperparameters. Fields irrelevant to an algorithm are
/// ignored (stumps always use depth 1).
#[derive(Clone, Debug, PartialEq)]
pub struct LearnerSpec {
    pub algorithm: Algorithm,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub n_trees: usize,
    pub n_boost_rounds: usize,
    /// Features examined per split by random forests; `None` means
    /// round(sqrt(feature count)).
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl LearnerSpec {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            max_depth: 6,
            min_leaf: 2,
            n_trees: 25,
            n_boost_rounds: 10,
            features_per_split: None,
            bootstrap: true,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), LearnError> {
        let bad = |what: &str| Err(LearnError::InvalidParameter(what.to_string()));
        if self.max_depth == 0 {
            return bad("max_depth must be positive");
        }
        if self.min_leaf == 0 {
            return bad("min_leaf must be positive");
        }
        if self.n_trees == 0 {
            return bad("n_trees must be positive");
        }
        if self.n_boost_rounds == 0 && matches!(self.algorithm, Algorithm::AdaBoostStump | Algorithm::AdaBoostCart) {
            return bad("n_boost_rounds must be positive for AdaBoost");
        }
        if self.features_per_split == Some(0) {
            return bad("features_per_split must be positive");
        }
        Ok(())
    }

    fn tree_params(&self, depth: usize) -> GrowParams {
        GrowParams {
            max_depth: depth,
            min_leaf: self.min_leaf,
            features_per_split: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub score: f64,
    pub class: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Tree(TreeModel),
    AdTree(AdTreeModel),
    Bayes(BayesModel),
    Ensemble(EnsembleModel),
}

impl Model {
    pub fn score(&self, row: RowRef<'_>) -> f64 {
        match self {
            Self::Tree(m) => m.probability(row),
            Self::AdTree(m) => m.score(row),
            Self::Bayes(m) => m.probability(row),
            Self::Ensemble(m) => m.score(row),
        }
    }

    /// Score above which class 1 is predicted.
    pub fn threshold(&self) -> f64 {
        match self {
            Self::AdTree(_)
            | Self::Ensemble(EnsembleModel {
                kind: EnsembleKind::AdaBoost,
                ..
            }) => 0.0,
            _ => 0.5,
        }
    }

    pub fn predict(&self, row: RowRef<'_>) -> Prediction {
        let score = self.score(row);
        Prediction {
            score,
            class: u8::from(score > self.threshold()),
        }
    }
}

/// A trained model with the schema it was trained on.
#[derive(Clone, Debug, PartialEq)]
pub struct FittedModel {
    pub algorithm: Algorithm,
    pub features: Vec<FeatureDef>,
    pub model: Model,
}

impl FittedModel {
    /// Predicts one row laid out in the training schema.
    pub fn predict_values(&self, values: &[Value]) -> Prediction {
        self.model.predict(SchemaIndex::new(&self.features).row(values))
    }

    /// Predicts every row of `matrix`, matching columns by name. Columns
    /// absent from the training schema are ignored.
    pub fn predict_matrix(&self, matrix: &FeatureMatrix) -> Result<Vec<Prediction>, LearnError> {
        for f in &self.features {
            match matrix.feature_index(&f.name) {
                Some(j) if matrix.features()[j].kind == f.kind => {}
                Some(_) => return Err(LearnError::SchemaMismatch(format!("feature {} has a different kind", f.name))),
                None => return Err(LearnError::SchemaMismatch(format!("feature {} is absent", f.name))),
            }
        }
        let index = SchemaIndex::new(matrix.features());
        Ok(matrix.rows().iter().map(|r| self.model.predict(index.row(&r.values))).collect())
    }
}

/// Trains `spec` on a labeled matrix. A single-class matrix yields a
/// constant classifier for that class.
pub fn train(matrix: &FeatureMatrix, spec: &LearnerSpec) -> Result<FittedModel, LearnError> {
    spec.validate()?;
    let data = TrainSet::new(matrix)?;
    let n = data.len();
    let pos = data.labels.iter().filter(|&&y| y == 1).count();
    let single_class = pos == 0 || pos == n;
    let all: Vec<usize> = (0..n).collect();
    let unit = vec![1.0; n];
    let model = match spec.algorithm {
        Algorithm::AdTree => Model::AdTree(adtree::train(&data, if single_class { 0 } else { spec.n_boost_rounds })),
        _ if single_class => Model::Tree(TreeModel::constant(pos as f64 / n as f64)),
        Algorithm::Stump => Model::Tree(tree::grow(&data, all, &unit, spec.tree_params(1), None)),
        Algorithm::Cart => Model::Tree(tree::grow(&data, all, &unit, spec.tree_params(spec.max_depth), None)),
        Algorithm::NaiveBayes => Model::Bayes(bayes::train(&data)),
        Algorithm::BaggingStump | Algorithm::BaggingCart | Algorithm::RandomForest => {
            let (kind, depth) = match spec.algorithm {
                Algorithm::BaggingStump => (EnsembleKind::Bagging, 1),
                Algorithm::BaggingCart => (EnsembleKind::Bagging, spec.max_depth),
                _ => (EnsembleKind::RandomForest, spec.max_depth),
            };
            let mut tree = spec.tree_params(depth);
            if kind == EnsembleKind::RandomForest {
                let k = spec
                    .features_per_split
                    .unwrap_or_else(|| ((data.names.len() as f64).sqrt().round() as usize).max(1));
                tree.features_per_split = Some(k);
            }
            let params = VoteParams {
                kind,
                tree,
                n_trees: spec.n_trees,
                bootstrap: spec.bootstrap,
                seed: spec.seed,
            };
            Model::Ensemble(ensemble::train_vote(&data, &params))
        }
        Algorithm::AdaBoostStump => Model::Ensemble(ensemble::train_adaboost(&data, spec.tree_params(1), spec.n_boost_rounds)),
        Algorithm::AdaBoostCart => Model::Ensemble(ensemble::train_adaboost(
            &data,
            spec.tree_params(spec.max_depth),
            spec.n_boost_rounds,
        )),
    };
    Ok(FittedModel {
        algorithm: spec.algorithm,
        features: matrix.features().to_vec(),
        model,
    })
}
