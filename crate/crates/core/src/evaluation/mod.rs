//! Stratified cross-validation, per-class precision, learner comparison,
//! best-model selection and single-split feature ranking.

mod ranking;
mod render;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use ranking::{rank_features, FeatureScore};
pub use render::{render_ranking_csv, render_ranking_table, render_report_csv, render_report_table};

use crate::error::{EvalError, LearnError};
use crate::features::FeatureMatrix;
use crate::learners::{train, LearnerSpec};

/// Train and test row indices of one fold, each ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Splits rows into `k` folds with near-equal class proportions.
///
/// Each class is shuffled (class 0 first, one RNG seeded by `seed`) and dealt
/// round-robin, the deal continuing across classes so fold sizes differ by at
/// most one.
pub fn stratified_kfold(matrix: &FeatureMatrix, k: usize, seed: u64) -> Result<Vec<Fold>, EvalError> {
    if k < 2 {
        return Err(EvalError::TooFewFolds(k));
    }
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, r) in matrix.rows().iter().enumerate() {
        let y = r.label.ok_or_else(|| EvalError::Unlabeled(r.billing_id.clone()))?;
        by_class[y as usize].push(i);
    }
    for (class, rows) in by_class.iter().enumerate() {
        if rows.len() < k {
            return Err(EvalError::ClassTooSmall {
                class: class as u8,
                count: rows.len(),
                k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tests = vec![Vec::new(); k];
    let mut slot = 0;
    for rows in &mut by_class {
        rows.shuffle(&mut rng);
        for &i in rows.iter() {
            tests[slot % k].push(i);
            slot += 1;
        }
    }
    let n = matrix.len();
    Ok(tests
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let mut in_test = vec![false; n];
            test.iter().for_each(|&i| in_test[i] = true);
            let train = (0..n).filter(|&i| !in_test[i]).collect();
            Fold { train, test }
        })
        .collect())
}

/// Binary confusion counts; class 1 is the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u8, u8)>) -> Self {
        let mut m = Self::default();
        for (predicted, actual) in pairs {
            m.record(predicted, actual);
        }
        m
    }

    pub fn record(&mut self, predicted: u8, actual: u8) {
        match (predicted, actual) {
            (1, 1) => self.tp += 1,
            (1, _) => self.fp += 1,
            (_, 1) => self.fn_ += 1,
            _ => self.tn += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Precision for class 1 in percent; `None` when nothing was predicted 1.
    pub fn prec_1(&self) -> Option<f64> {
        percent(self.tp, self.tp + self.fp)
    }

    /// Precision for class 0 in percent; `None` when nothing was predicted 0.
    pub fn prec_0(&self) -> Option<f64> {
        percent(self.tn, self.tn + self.fn_)
    }

    pub fn accuracy(&self) -> Option<f64> {
        percent(self.tp + self.tn, self.total())
    }
}

impl std::ops::Add for ConfusionMatrix {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            tn: self.tn + o.tn,
            fn_: self.fn_ + o.fn_,
        }
    }
}

impl std::iter::Sum for ConfusionMatrix {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |a, b| a + b)
    }
}

fn percent(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnerScores {
    pub folds: Vec<ConfusionMatrix>,
    /// Sum of the fold matrices.
    pub pooled: ConfusionMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnerResult {
    /// Column label, unique within the report.
    pub label: String,
    pub spec: LearnerSpec,
    pub outcome: Result<LearnerScores, LearnError>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub k: usize,
    pub seed: u64,
    pub results: Vec<LearnerResult>,
}

/// Cross-validates every spec on the same folds. A learner that fails on
/// any fold reports that error; the other columns are unaffected.
pub fn compare_learners(matrix: &FeatureMatrix, specs: &[LearnerSpec], k: usize, seed: u64) -> Result<EvalReport, EvalError> {
    let folds = stratified_kfold(matrix, k, seed)?;
    let cells: Vec<(usize, usize)> = (0..specs.len()).flat_map(|s| (0..k).map(move |f| (s, f))).collect();
    let outcomes: Vec<Result<ConfusionMatrix, LearnError>> = cells
        .par_iter()
        .map(|&(s, f)| evaluate_fold(matrix, &specs[s], &folds[f]))
        .collect();
    let labels = column_labels(specs);
    let results = specs
        .iter()
        .zip(labels)
        .enumerate()
        .map(|(s, (spec, label))| {
            let folds: Result<Vec<ConfusionMatrix>, LearnError> = outcomes[s * k..(s + 1) * k].iter().cloned().collect();
            let outcome = folds.map(|folds| LearnerScores {
                pooled: folds.iter().copied().sum(),
                folds,
            });
            LearnerResult {
                label,
                spec: spec.clone(),
                outcome,
            }
        })
        .collect();
    Ok(EvalReport { k, seed, results })
}

/// Trains on the fold's training rows and scores its unlabeled test rows.
fn evaluate_fold(matrix: &FeatureMatrix, spec: &LearnerSpec, fold: &Fold) -> Result<ConfusionMatrix, LearnError> {
    let model = train(&matrix.select(&fold.train), spec)?;
    let test = matrix.select(&fold.test);
    let predictions = model.predict_matrix(&test.without_labels())?;
    let actual = test.labels().ok_or_else(|| LearnError::Unlabeled("test fold".into()))?;
    Ok(ConfusionMatrix::from_pairs(predictions.iter().map(|p| p.class).zip(actual)))
}

/// Display names, with `#2`, `#3`, ... appended to repeats.
fn column_labels(specs: &[LearnerSpec]) -> Vec<String> {
    let mut seen = std::collections::HashMap::new();
    specs
        .iter()
        .map(|s| {
            let n = seen.entry(s.algorithm).or_insert(0);
            *n += 1;
            let name = s.algorithm.display_name();
            if *n == 1 {
                name.to_string()
            } else {
                format!("{name}#{n}")
            }
        })
        .collect()
}

/// Index of the result with the highest Prec_1; ties go to higher accuracy,
/// then to the smaller learner id, then to the earlier column. Undefined
/// precision ranks below every defined value.
pub fn select_best(report: &EvalReport) -> Result<usize, EvalError> {
    let key = |r: &LearnerResult| {
        let pooled = r.outcome.as_ref().ok()?.pooled;
        Some((
            pooled.prec_1().unwrap_or(f64::NEG_INFINITY),
            pooled.accuracy().unwrap_or(f64::NEG_INFINITY),
        ))
    };
    let mut best: Option<(usize, (f64, f64))> = None;
    for (i, r) in report.results.iter().enumerate() {
        let Some(k) = key(r) else { continue };
        let better = match best {
            None => true,
            Some((j, b)) => {
                let id_first = r.spec.algorithm.id() < report.results[j].spec.algorithm.id();
                k.0 > b.0 || (k.0 == b.0 && (k.1 > b.1 || (k.1 == b.1 && id_first)))
            }
        };
        if better {
            best = Some((i, k));
        }
    }
    best.map(|(i, _)| i).ok_or(EvalError::NoUsableResult)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureDef, Row, Value};
    use crate::learners::Algorithm;

    fn labeled(n0: usize, n1: usize) -> FeatureMatrix {
        let rows = (0..n0 + n1)
            .map(|i| Row {
                billing_id: format!("B{i:05}"),
                values: vec![Value::Num(i as f64 + if i >= n0 { 1000.0 } else { 0.0 })],
                label: Some(u8::from(i >= n0)),
            })
            .collect();
        FeatureMatrix::from_rows(vec![FeatureDef::numeric("x")], rows).unwrap()
    }

    #[test]
    fn balanced_hundred_gives_five_and_five() {
        let m = labeled(50, 50);
        for f in stratified_kfold(&m, 10, 3).unwrap() {
            let pos = f.test.iter().filter(|&&i| i >= 50).count();
            assert_eq!((f.test.len() - pos, pos), (5, 5));
        }
    }

    #[test]
    fn odd_count_fold_sizes_differ_by_one() {
        let folds = stratified_kfold(&labeled(50, 51), 10, 3).unwrap();
        let sizes: Vec<usize> = folds.iter().map(|f| f.test.len()).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn fold_errors() {
        assert_eq!(stratified_kfold(&labeled(5, 5), 1, 0), Err(EvalError::TooFewFolds(1)));
        assert_eq!(
            stratified_kfold(&labeled(20, 3), 4, 0),
            Err(EvalError::ClassTooSmall { class: 1, count: 3, k: 4 })
        );
    }

    #[test]
    fn metrics_and_undefined_precision() {
        let m = ConfusionMatrix {
            tp: 5,
            fp: 5,
            tn: 0,
            fn_: 0,
        };
        assert_eq!(m.prec_1(), Some(50.0));
        assert_eq!(m.prec_0(), None);
        assert_eq!(m.accuracy(), Some(50.0));
    }

    #[test]
    fn perfect_learner_scores_hundred() {
        let m = labeled(30, 30);
        let report = compare_learners(&m, &[LearnerSpec::new(Algorithm::Stump)], 5, 1).unwrap();
        let pooled = report.results[0].outcome.as_ref().unwrap().pooled;
        assert_eq!(
            (pooled.prec_1(), pooled.prec_0(), pooled.accuracy()),
            (Some(100.0), Some(100.0), Some(100.0))
        );
        assert_eq!(pooled.total(), 60);
    }

    #[test]
    fn failing_cell_leaves_others_intact() {
        let m = labeled(20, 20);
        let bad = LearnerSpec {
            max_depth: 0,
            ..LearnerSpec::new(Algorithm::Cart)
        };
        let report = compare_learners(&m, &[bad, LearnerSpec::new(Algorithm::Stump)], 4, 1).unwrap();
        assert!(report.results[0].outcome.is_err());
        assert!(report.results[1].outcome.is_ok());
        assert_eq!(select_best(&report), Ok(1));
    }

    fn result(algorithm: Algorithm, m: ConfusionMatrix) -> LearnerResult {
        LearnerResult {
            label: algorithm.display_name().into(),
            spec: LearnerSpec::new(algorithm),
            outcome: Ok(LearnerScores { folds: vec![m], pooled: m }),
        }
    }

    #[test]
    fn selection_tie_rules() {
        let a = ConfusionMatrix {
            tp: 8,
            fp: 2,
            tn: 10,
            fn_: 10,
        };
        let b = ConfusionMatrix {
            tp: 16,
            fp: 4,
            tn: 5,
            fn_: 5,
        };
        let report = EvalReport {
            k: 2,
            seed: 0,
            results: vec![result(Algorithm::Cart, a), result(Algorithm::Stump, b)],
        };
        // equal Prec_1 (80), accuracy 60 vs 70
        assert_eq!(select_best(&report), Ok(1));
        let same = EvalReport {
            k: 2,
            seed: 0,
            results: vec![result(Algorithm::Stump, a), result(Algorithm::Cart, a)],
        };
        assert_eq!(select_best(&same), Ok(1));
        let empty = EvalReport {
            k: 2,
            seed: 0,
            results: vec![],
        };
        assert_eq!(select_best(&empty), Err(EvalError::NoUsableResult));
    }
}
