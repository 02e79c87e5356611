//! Naive Bayes with Gaussian numeric likelihoods and Laplace-smoothed
//! categorical frequencies. Missing values are skipped at train and predict
//! time.

use super::data::{Column, TrainSet, MISSING_CODE};
use crate::features::{RowRef, Value};

/// Variance floor as a fraction of the feature's pooled variance.
pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum BayesFeature {
    Gaussian {
        feature: String,
        mean: [f64; 2],
        var: [f64; 2],
    },
    /// `counts[level][class]`; an unseen level gets one pseudo-count.
    Categorical {
        feature: String,
        levels: Vec<String>,
        counts: Vec<[f64; 2]>,
    },
}

impl BayesFeature {
    pub fn name(&self) -> &str {
        match self {
            Self::Gaussian { feature, .. } | Self::Categorical { feature, .. } => feature,
        }
    }

    fn log_likelihood(&self, value: &Value) -> Option<[f64; 2]> {
        match (self, value) {
            (Self::Gaussian { mean, var, .. }, Value::Num(x)) => Some(std::array::from_fn(|c| {
                let d = x - mean[c];
                -0.5 * (2.0 * std::f64::consts::PI * var[c]).ln() - d * d / (2.0 * var[c])
            })),
            (Self::Categorical { levels, counts, .. }, Value::Cat(v)) => {
                let totals: [f64; 2] = std::array::from_fn(|c| counts.iter().map(|k| k[c]).sum());
                let denom: [f64; 2] = std::array::from_fn(|c| totals[c] + levels.len() as f64 + 1.0);
                let hit = levels.binary_search(v).ok().map(|i| counts[i]).unwrap_or([0.0, 0.0]);
                Some(std::array::from_fn(|c| ((hit[c] + 1.0) / denom[c]).ln()))
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BayesModel {
    /// Training rows per class.
    pub class_counts: [f64; 2],
    pub features: Vec<BayesFeature>,
}

impl BayesModel {
    /// Posterior probability of class 1.
    pub fn probability(&self, row: RowRef<'_>) -> f64 {
        let n = self.class_counts[0] + self.class_counts[1];
        let mut log = [(self.class_counts[0] / n).ln(), (self.class_counts[1] / n).ln()];
        for f in &self.features {
            if let Some(ll) = f.log_likelihood(row.get(f.name())) {
                log[0] += ll[0];
                log[1] += ll[1];
            }
        }
        // P(1) = 1 / (1 + exp(log0 - log1))
        let d = log[0] - log[1];
        if d.is_nan() {
            0.5
        } else {
            1.0 / (1.0 + d.exp())
        }
    }
}

pub(crate) fn train(data: &TrainSet) -> BayesModel {
    let mut class_counts = [0.0; 2];
    for &y in &data.labels {
        class_counts[y as usize] += 1.0;
    }
    let features = data
        .by_name
        .iter()
        .filter_map(|&f| {
            let name = data.names[f].clone();
            match &data.columns[f] {
                Column::Numeric(values) => gaussian(name, values, &data.labels),
                Column::Categorical { codes, levels } => {
                    let mut counts = vec![[0.0; 2]; levels.len()];
                    for (&c, &y) in codes.iter().zip(&data.labels) {
                        if c != MISSING_CODE {
                            counts[c as usize][y as usize] += 1.0;
                        }
                    }
                    Some(BayesFeature::Categorical {
                        feature: name,
                        levels: levels.clone(),
                        counts,
                    })
                }
            }
        })
        .collect();
    BayesModel { class_counts, features }
}

/// `None` when a class has no observed value for the feature.
fn gaussian(feature: String, values: &[f64], labels: &[u8]) -> Option<BayesFeature> {
    let mut n = [0.0; 2];
    let mut sum = [0.0; 2];
    for (&x, &y) in values.iter().zip(labels) {
        if !x.is_nan() {
            n[y as usize] += 1.0;
            sum[y as usize] += x;
        }
    }
    if n[0] == 0.0 || n[1] == 0.0 {
        return None;
    }
    let mean = [sum[0] / n[0], sum[1] / n[1]];
    let pooled_mean = (sum[0] + sum[1]) / (n[0] + n[1]);
    let mut ss = [0.0; 2];
    let mut pooled_ss = 0.0;
    for (&x, &y) in values.iter().zip(labels) {
        if !x.is_nan() {
            ss[y as usize] += (x - mean[y as usize]).powi(2);
            pooled_ss += (x - pooled_mean).powi(2);
        }
    }
    let pooled_var = pooled_ss / (n[0] + n[1]);
    let floor = VARIANCE_FLOOR * if pooled_var > 0.0 { pooled_var } else { 1.0 };
    let var = [(ss[0] / n[0]).max(floor), (ss[1] / n[1]).max(floor)];
    Some(BayesFeature::Gaussian { feature, mean, var })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureDef, FeatureMatrix, Row, SchemaIndex};

    fn fit(features: Vec<FeatureDef>, rows: Vec<(Vec<Value>, u8)>) -> (FeatureMatrix, BayesModel) {
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(i, (values, y))| Row {
                billing_id: format!("B{i}"),
                values,
                label: Some(y),
            })
            .collect();
        let m = FeatureMatrix::from_rows(features, rows).unwrap();
        let model = train(&TrainSet::new(&m).unwrap());
        (m, model)
    }

    #[test]
    fn symmetric_classes_split_at_midpoint() {
        let xs0 = [-1.0, 0.0, 1.0];
        let rows = xs0
            .iter()
            .map(|&x| (vec![Value::Num(x)], 0))
            .chain(xs0.iter().map(|&x| (vec![Value::Num(x + 10.0)], 1)))
            .collect();
        let (m, model) = fit(vec![FeatureDef::numeric("x")], rows);
        let idx = SchemaIndex::new(m.features());
        let p = |x: f64| model.probability(idx.row(&[Value::Num(x)]));
        assert!((p(5.0) - 0.5).abs() < 1e-12);
        assert!(p(4.9) < 0.5 && p(5.1) > 0.5);
    }

    #[test]
    fn zero_variance_feature_is_floored() {
        let rows = vec![
            (vec![Value::Num(3.0)], 0),
            (vec![Value::Num(3.0)], 0),
            (vec![Value::Num(3.0)], 1),
            (vec![Value::Num(3.0)], 1),
        ];
        let (m, model) = fit(vec![FeatureDef::numeric("x")], rows);
        let idx = SchemaIndex::new(m.features());
        let p = model.probability(idx.row(&[Value::Num(3.0)]));
        assert_eq!(p, 0.5);
        assert!(model.probability(idx.row(&[Value::Num(4.0)])).is_finite());
    }

    #[test]
    fn four_row_posterior_by_hand() {
        // class 0: x in {0, 2}, c in {a, a}; class 1: x in {4, 6}, c in {a, b}
        let cat = |s: &str| Value::Cat(s.into());
        let rows = vec![
            (vec![Value::Num(0.0), cat("a")], 0),
            (vec![Value::Num(2.0), cat("a")], 0),
            (vec![Value::Num(4.0), cat("a")], 1),
            (vec![Value::Num(6.0), cat("b")], 1),
        ];
        let (m, model) = fit(vec![FeatureDef::numeric("x"), FeatureDef::categorical("c")], rows);
        let idx = SchemaIndex::new(m.features());
        let p = model.probability(idx.row(&[Value::Num(3.0), cat("a")]));
        // means 1 and 5, variance 1 each; x=3 is equidistant so the Gaussian
        // terms cancel. P(a|0) = 3/5, P(a|1) = 2/5 with levels {a,b} + unseen.
        let (l0, l1) = (0.5 * 3.0 / 5.0, 0.5 * 2.0 / 5.0);
        assert!((p - l1 / (l0 + l1)).abs() < 1e-12, "{p}");
        // missing values contribute nothing
        let q = model.probability(idx.row(&[Value::Missing, Value::Missing]));
        assert!((q - 0.5).abs() < 1e-12);
    }
}
