use churnforge::evaluation::{compare_learners, rank_features, select_best, stratified_kfold, ConfusionMatrix};
use churnforge::features::{extract_churn, standard_windows, FeatureDef, FeatureMatrix, Population, Role, Row, Task, Value};
use churnforge::learners::{Algorithm, LearnerSpec};
use churnforge::rebalance::undersample;
use churnforge::telco::{generate, GeneratorConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn matrix(labels: &[u8], seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = labels
        .iter()
        .enumerate()
        .map(|(i, &y)| Row {
            billing_id: format!("B{i:05}"),
            values: vec![
                Value::Num(y as f64 + rng.random_range(-1.5..1.5)),
                Value::Num(rng.random_range(0.0..1.0)),
            ],
            label: Some(y),
        })
        .collect();
    FeatureMatrix::from_rows(vec![FeatureDef::numeric("signal"), FeatureDef::numeric("noise")], rows).unwrap()
}

proptest! {
    #[test]
    fn folds_partition_rows(n0 in 5usize..80, n1 in 5usize..80, k in 2usize..6, seed in any::<u64>()) {
        let labels: Vec<u8> = (0..n0 + n1).map(|i| u8::from(i % (n0 + n1) >= n0)).collect();
        let m = matrix(&labels, seed);
        let folds = stratified_kfold(&m, k, seed).unwrap();
        let mut seen = vec![0; labels.len()];
        for f in &folds {
            for &i in &f.test { seen[i] += 1; }
            prop_assert_eq!(f.train.len() + f.test.len(), labels.len());
            prop_assert!(f.train.iter().all(|i| !f.test.contains(i)));
            for (class, total) in [(0u8, n0), (1u8, n1)] {
                let got = f.test.iter().filter(|&&i| labels[i] == class).count() as f64;
                prop_assert!((got - total as f64 / k as f64).abs() < 1.0);
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        prop_assert_eq!(folds, stratified_kfold(&m, k, seed).unwrap());
    }
}

#[test]
fn metrics_match_a_counting_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pairs: Vec<(u8, u8)> = (0..500).map(|_| (rng.random_range(0..2), rng.random_range(0..2))).collect();
    let m = ConfusionMatrix::from_pairs(pairs.iter().copied());
    let count = |p: u8, a: u8| pairs.iter().filter(|&&x| x == (p, a)).count() as f64;
    let prec_1 = 100.0 * count(1, 1) / (count(1, 1) + count(1, 0));
    let prec_0 = 100.0 * count(0, 0) / (count(0, 0) + count(0, 1));
    let acc = 100.0 * (count(1, 1) + count(0, 0)) / 500.0;
    assert_eq!((m.prec_1(), m.prec_0(), m.accuracy()), (Some(prec_1), Some(prec_0), Some(acc)));
}

#[test]
fn constant_positive_classifier_metrics() {
    let m = ConfusionMatrix::from_pairs((0..100).map(|i| (1, u8::from(i < 50))));
    assert_eq!((m.prec_1(), m.prec_0(), m.accuracy()), (Some(50.0), None, Some(50.0)));
}

#[test]
fn pooled_matrix_is_the_sum_of_folds_and_report_is_deterministic() {
    let labels: Vec<u8> = (0..300).map(|i| u8::from(i % 3 == 0)).collect();
    let m = matrix(&labels, 9);
    let specs: Vec<LearnerSpec> = [Algorithm::Stump, Algorithm::Cart, Algorithm::NaiveBayes]
        .map(|a| LearnerSpec::new(a).with_seed(1))
        .to_vec();
    let report = compare_learners(&m, &specs, 10, 4).unwrap();
    for r in &report.results {
        let s = r.outcome.as_ref().unwrap();
        assert_eq!(s.folds.len(), 10);
        let sum = s.folds.iter().fold(ConfusionMatrix::default(), |a, &b| a + b);
        assert_eq!(sum, s.pooled);
        assert_eq!(s.pooled.total(), 300);
    }
    assert_eq!(report, compare_learners(&m, &specs, 10, 4).unwrap());
    assert!(select_best(&report).is_ok());
}

#[test]
fn single_learner_is_selected() {
    let labels: Vec<u8> = (0..40).map(|i| u8::from(i < 20)).collect();
    let report = compare_learners(&matrix(&labels, 1), &[LearnerSpec::new(Algorithm::Cart)], 4, 0).unwrap();
    assert_eq!(select_best(&report), Ok(0));
}

#[test]
fn noise_ranking_is_stable() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let features: Vec<FeatureDef> = (0..6).map(|j| FeatureDef::numeric(format!("n{j}"))).collect();
    let rows = (0..400)
        .map(|i| Row {
            billing_id: format!("B{i:04}"),
            values: (0..6).map(|_| Value::Num(rng.random_range(0.0..1.0))).collect(),
            label: Some(rng.random_range(0..2)),
        })
        .collect();
    let m = FeatureMatrix::from_rows(features, rows).unwrap();
    let first = rank_features(&m, 6);
    assert!(first.iter().all(|s| s.gain < 0.05), "{first:?}");
    for _ in 0..5 {
        assert_eq!(rank_features(&m, 6), first);
    }
    // exact ties fall back to name order
    let tied = FeatureMatrix::from_rows(
        vec![FeatureDef::numeric("b"), FeatureDef::numeric("a")],
        (0..10)
            .map(|i| Row {
                billing_id: format!("B{i}"),
                values: vec![Value::Num(i as f64); 2],
                label: Some(u8::from(i < 5)),
            })
            .collect(),
    )
    .unwrap();
    let names: Vec<String> = rank_features(&tied, 2).into_iter().map(|s| s.feature).collect();
    assert_eq!(names, ["a", "b"]);
}

#[test]
fn planted_usage_features_dominate_ranking() {
    let cfg = GeneratorConfig {
        seed: 3,
        n_consumers: 4000,
        n_smes: 0,
        ..GeneratorConfig::default()
    };
    let data = generate(&cfg).unwrap();
    let m = extract_churn(&data, &standard_windows(Task::Churn, Role::Train), Population::all()).unwrap();
    let ranked = rank_features(&undersample(&m, 1).unwrap(), 10);
    let usage = ranked
        .iter()
        .filter(|s| ["DL", "UL", "3M_DL", "3M_UL"].iter().any(|p| s.feature.starts_with(p)))
        .count();
    assert!(usage > 5, "{ranked:?}");
}
