//! Tree ensembles: bagging, random forest and AdaBoost.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::data::TrainSet;
use super::tree::{grow, GrowParams, TreeModel};
use crate::features::RowRef;

/// Error rate clamp for AdaBoost member weights.
const MIN_ERROR: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnsembleKind {
    Bagging,
    RandomForest,
    AdaBoost,
}

impl EnsembleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Bagging => "bagging",
            Self::RandomForest => "random_forest",
            Self::AdaBoost => "adaboost",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::Bagging, Self::RandomForest, Self::AdaBoost]
            .into_iter()
            .find(|k| k.as_str() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleModel {
    pub kind: EnsembleKind,
    pub members: Vec<TreeModel>,
    pub weights: Vec<f64>,
}

impl EnsembleModel {
    /// Bagging and forests: weighted mean of member class-1 probabilities.
    /// AdaBoost: sum of member weights times +1/-1 member votes.
    pub fn score(&self, row: RowRef<'_>) -> f64 {
        let votes = self.members.iter().zip(&self.weights);
        match self.kind {
            EnsembleKind::AdaBoost => votes.map(|(m, w)| if m.probability(row) > 0.5 { *w } else { -*w }).sum(),
            EnsembleKind::Bagging | EnsembleKind::RandomForest => {
                let total: f64 = self.weights.iter().sum();
                votes.map(|(m, w)| w * m.probability(row)).sum::<f64>() / total
            }
        }
    }
}

pub(crate) struct VoteParams {
    pub kind: EnsembleKind,
    pub tree: GrowParams,
    pub n_trees: usize,
    pub bootstrap: bool,
    pub seed: u64,
}

/// Bagging or random forest. Member `i` draws from stream `i` of `seed`.
pub(crate) fn train_vote(data: &TrainSet, p: &VoteParams) -> EnsembleModel {
    let n = data.len();
    let unit = vec![1.0; n];
    let members: Vec<TreeModel> = (0..p.n_trees)
        .into_par_iter()
        .map(|m| {
            let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
            rng.set_stream(m as u64);
            let samples: Vec<usize> = if p.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grow(data, samples, &unit, p.tree, Some(&mut rng))
        })
        .collect();
    let weights = vec![1.0; members.len()];
    EnsembleModel {
        kind: p.kind,
        members,
        weights,
    }
}

/// AdaBoost.M1 with reweighting.
pub(crate) fn train_adaboost(data: &TrainSet, tree: GrowParams, rounds: usize) -> EnsembleModel {
    let n = data.len();
    let mut w = vec![1.0 / n as f64; n];
    let mut members = Vec::new();
    let mut weights = Vec::new();
    for _ in 0..rounds {
        let member = grow(data, (0..n).collect(), &w, tree, None);
        let wrong: Vec<bool> = (0..n)
            .map(|i| u8::from(member.probability_at(data, i) > 0.5) != data.labels[i])
            .collect();
        let total: f64 = w.iter().sum();
        let eps = w.iter().zip(&wrong).filter(|(_, &bad)| bad).map(|(x, _)| x).sum::<f64>() / total;
        if eps >= 0.5 {
            break;
        }
        let e = eps.max(MIN_ERROR);
        let alpha = 0.5 * ((1.0 - e) / e).ln();
        members.push(member);
        weights.push(alpha);
        if eps == 0.0 {
            break;
        }
        for (x, &bad) in w.iter_mut().zip(&wrong) {
            *x *= if bad { alpha.exp() } else { (-alpha).exp() };
        }
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
    }
    if members.is_empty() {
        let pos = data.labels.iter().filter(|&&y| y == 1).count() as f64;
        members.push(TreeModel::constant(pos / n as f64));
        weights.push(1.0);
    }
    EnsembleModel {
        kind: EnsembleKind::AdaBoost,
        members,
        weights,
    }
}
