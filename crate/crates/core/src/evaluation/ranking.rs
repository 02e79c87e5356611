use crate::features::FeatureMatrix;
use crate::learners::data::TrainSet;
use crate::learners::split::{best_for_feature, entropy_cost, weighted_entropy, Mass};

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureScore {
    pub feature: String,
    /// Information gain in bits per row of the feature's best single split.
    pub gain: f64,
}

/// Features ordered by single-split information gain, highest first, with
/// exact ties in name order. Returns at most `top_n` entries; unlabeled or
/// empty matrices rank nothing.
pub fn rank_features(matrix: &FeatureMatrix, top_n: usize) -> Vec<FeatureScore> {
    let Ok(data) = TrainSet::new(matrix) else {
        return Vec::new();
    };
    let n = data.len();
    let samples: Vec<usize> = (0..n).collect();
    let unit = vec![1.0; n];
    let mut all = Mass::default();
    for &y in &data.labels {
        all.add(y, 1.0);
    }
    let parent = weighted_entropy(&all);
    let mut scores: Vec<FeatureScore> = data
        .by_name
        .iter()
        .map(|&f| {
            let cost = best_for_feature(&data, f, &samples, &unit, 1, &entropy_cost).map_or(parent, |c| c.cost);
            FeatureScore {
                feature: data.names[f].clone(),
                gain: ((parent - cost) / n as f64).max(0.0),
            }
        })
        .collect();
    scores.sort_by(|a, b| b.gain.total_cmp(&a.gain).then_with(|| a.feature.cmp(&b.feature)));
    scores.truncate(top_n);
    scores
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureDef, Row, Value};

    #[test]
    fn perfect_predictor_ranks_first_with_one_bit() {
        let rows = (0..40)
            .map(|i| Row {
                billing_id: format!("B{i:03}"),
                values: vec![Value::Num(((i * 7) % 5) as f64), Value::Num(i as f64)],
                label: Some(u8::from(i >= 20)),
            })
            .collect();
        let m = FeatureMatrix::from_rows(vec![FeatureDef::numeric("a_noise"), FeatureDef::numeric("z_signal")], rows).unwrap();
        let ranked = rank_features(&m, 10);
        assert_eq!(ranked[0].feature, "z_signal");
        assert!((ranked[0].gain - 1.0).abs() < 1e-12);
        assert!(ranked[1].gain < 0.2);
        assert_eq!(rank_features(&m, 1).len(), 1);
    }
}
