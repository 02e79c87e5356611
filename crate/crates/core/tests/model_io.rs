use std::path::PathBuf;

use churnforge::error::ModelIoError;
use churnforge::features::{FeatureDef, FeatureMatrix, Row, SchemaIndex, Value};
use churnforge::learners::{train, AdTreeModel, Algorithm, Branch, EnsembleKind, EnsembleModel, FittedModel, LearnerSpec, Model};
use churnforge::learners::{PredictionNode, SplitCondition, Splitter, TreeModel};
use churnforge::model_io::{from_text, load_adtree, load_model, parse_adtree, print_adtree, save_model, to_text, HEADER};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn golden() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/figure1.adt")
}

fn figure_row(pairs: &[(&str, Value)]) -> (Vec<FeatureDef>, Vec<Value>) {
    let defs = pairs
        .iter()
        .map(|(n, v)| {
            if matches!(v, Value::Cat(_)) {
                FeatureDef::categorical(*n)
            } else {
                FeatureDef::numeric(*n)
            }
        })
        .collect();
    (defs, pairs.iter().map(|(_, v)| v.clone()).collect())
}

#[test]
fn golden_figure_parses_prints_and_scores() {
    let text = std::fs::read_to_string(golden()).unwrap();
    let model = load_adtree(&golden()).unwrap();
    assert_eq!(print_adtree(&model), text);
    assert!(text.contains("(1)UL1110 < 0.5: 0.941"));
    assert!(text.contains("(6)T_Location = AJP: 0.697"));
    let indices: Vec<usize> = model.splitters().iter().map(|s| s.index).collect();
    assert_eq!(indices, [1, 3, 10, 2, 6, 9, 4, 5, 7, 8]);

    let (defs, values) = figure_row(&[
        ("UL1110", Value::Num(0.0)),
        ("OUTSTANDING_avg", Value::Num(500.0)),
        ("CREDIT_ADJ_avg", Value::Num(-10.0)),
    ]);
    let score = model.score(SchemaIndex::new(&defs).row(&values));
    assert!((score - 2.204).abs() < 1e-9, "{score}");
}

fn random_condition(rng: &mut ChaCha8Rng) -> SplitCondition {
    let feature = format!("f{}", rng.random_range(0..4));
    let missing = [None, Some(Branch::Left), Some(Branch::Right)][rng.random_range(0..3)];
    if rng.random_bool(0.7) {
        SplitCondition::less(feature, (rng.random_range(-1000..1000) as f64) / 8.0, missing)
    } else {
        SplitCondition::equals(
            format!("c{}", rng.random_range(0..2)),
            ["AJP", "TLS", "KL"][rng.random_range(0..3)],
            missing,
        )
    }
}

/// Random ADTree with `n` splitters and three-decimal prediction values.
fn random_adtree(rng: &mut ChaCha8Rng, n: usize) -> AdTreeModel {
    let value = |rng: &mut ChaCha8Rng| rng.random_range(-2000..2000) as f64 / 1000.0;
    let mut root = PredictionNode::leaf(value(rng));
    for index in 1..=n {
        // walk to a random prediction node
        let mut node = &mut root;
        while !node.splitters.is_empty() && rng.random_bool(0.6) {
            let k = rng.random_range(0..node.splitters.len());
            let s = &mut node.splitters[k];
            node = if rng.random_bool(0.5) { &mut s.yes } else { &mut s.no };
        }
        let (yes, no) = (value(rng), value(rng));
        node.splitters.push(Splitter {
            index,
            condition: random_condition(rng),
            yes: PredictionNode::leaf(yes),
            no: PredictionNode::leaf(no),
        });
    }
    AdTreeModel { root }
}

#[test]
fn random_adtrees_round_trip_through_text() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let m = random_adtree(&mut rng, 20);
        assert_eq!(parse_adtree(&print_adtree(&m)).unwrap(), m);
        let fitted = FittedModel {
            algorithm: Algorithm::AdTree,
            features: vec![],
            model: Model::AdTree(m),
        };
        assert_eq!(from_text(&to_text(&fitted).unwrap()).unwrap(), fitted);
    }
}

fn mixed_matrix(n: usize, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features = vec![FeatureDef::numeric("a"), FeatureDef::numeric("b"), FeatureDef::categorical("loc")];
    let rows = (0..n)
        .map(|i| {
            let a: f64 = rng.random_range(0.0..10.0);
            let b = if rng.random_bool(0.1) {
                Value::Missing
            } else {
                Value::Num(rng.random_range(-3.0..3.0))
            };
            let loc = ["AJP", "TLS", "KL"][rng.random_range(0..3)];
            let y = u8::from(a + if loc == "AJP" { 2.0 } else { 0.0 } + rng.random_range(-2.0..2.0) > 6.0);
            Row {
                billing_id: format!("B{i:04}"),
                values: vec![Value::Num(a), b, Value::Cat(loc.into())],
                label: Some(y),
            }
        })
        .collect();
    FeatureMatrix::from_rows(features, rows).unwrap()
}

#[test]
fn every_model_type_round_trips_through_files() {
    let m = mixed_matrix(100, 4);
    let dir = tempfile::tempdir().unwrap();
    for a in Algorithm::ALL {
        let model = train(&m, &LearnerSpec::new(a).with_seed(3)).unwrap();
        let path = dir.path().join(format!("{a}.cfm"));
        save_model(&model, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(&format!("{HEADER}\n")));
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded, model, "{a}");
        assert_eq!(loaded.predict_matrix(&m).unwrap(), model.predict_matrix(&m).unwrap(), "{a}");
        assert_eq!(to_text(&loaded).unwrap(), text);
    }
}

#[test]
fn empty_ensemble_is_rejected() {
    let model = FittedModel {
        algorithm: Algorithm::BaggingCart,
        features: vec![],
        model: Model::Ensemble(EnsembleModel {
            kind: EnsembleKind::Bagging,
            members: vec![],
            weights: vec![],
        }),
    };
    assert!(matches!(to_text(&model), Err(ModelIoError::Invalid(_))));
}

#[test]
fn version_and_truncation_errors() {
    let model = FittedModel {
        algorithm: Algorithm::Cart,
        features: vec![FeatureDef::numeric("x")],
        model: Model::Tree(TreeModel::constant(0.25)),
    };
    let text = to_text(&model).unwrap();
    let v2 = text.replacen("v1", "v2", 1);
    assert!(matches!(from_text(&v2), Err(ModelIoError::Version { found, .. }) if found == "v2"));
    let lines: Vec<&str> = text.lines().collect();
    for keep in 1..lines.len() {
        let cut = format!("{}\n", lines[..keep].join("\n"));
        assert!(matches!(from_text(&cut), Err(ModelIoError::Truncated(_))), "{cut:?}");
    }
    assert!(matches!(from_text(&text[..text.len() - 1]), Err(ModelIoError::Truncated(_))));
    assert!(matches!(from_text(&format!("{text}leaf\t0\n")), Err(ModelIoError::Parse { .. })));
}
