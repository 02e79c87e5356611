use churnforge::features::{extract_churn, standard_windows, FeatureDef, FeatureMatrix, Population, Role, Row, SchemaIndex, Task, Value};
use churnforge::learners::{train, AdTreeModel, Algorithm, FittedModel, Model, PredictionNode, TreeModel, TreeNode};
use churnforge::learners::{LearnerSpec, Test};
use churnforge::rebalance::undersample;
use churnforge::telco::{generate, GeneratorConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn numeric_matrix(cols: usize, rows: &[(Vec<f64>, u8)]) -> FeatureMatrix {
    let features = (0..cols).map(|j| FeatureDef::numeric(format!("x{j}"))).collect();
    let rows = rows
        .iter()
        .enumerate()
        .map(|(i, (xs, y))| Row {
            billing_id: format!("B{i:04}"),
            values: xs.iter().map(|&x| Value::Num(x)).collect(),
            label: Some(*y),
        })
        .collect();
    FeatureMatrix::from_rows(features, rows).unwrap()
}

fn random_matrix(seed: u64, n: usize, cols: usize) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<(Vec<f64>, u8)> = (0..n)
        .map(|_| {
            let xs: Vec<f64> = (0..cols).map(|_| rng.random_range(-5.0..5.0)).collect();
            let y = u8::from(xs[0] + 0.5 * xs[1] + rng.random_range(-2.0..2.0) > 0.0);
            (xs, y)
        })
        .collect();
    numeric_matrix(cols, &rows)
}

fn spec(algorithm: Algorithm) -> LearnerSpec {
    LearnerSpec::new(algorithm).with_seed(11)
}

fn predictions(model: &FittedModel, m: &FeatureMatrix) -> Vec<(f64, u8)> {
    model.predict_matrix(m).unwrap().into_iter().map(|p| (p.score, p.class)).collect()
}

fn accuracy(model: &FittedModel, m: &FeatureMatrix) -> f64 {
    let preds = model.predict_matrix(m).unwrap();
    let hits = preds.iter().zip(m.rows()).filter(|(p, r)| Some(p.class) == r.label).count();
    hits as f64 / m.len() as f64
}

fn tree_of(model: &FittedModel) -> &TreeModel {
    match &model.model {
        Model::Tree(t) => t,
        other => panic!("expected a tree, got {other:?}"),
    }
}

/// Row indices reaching each tree node.
fn tree_partition(tree: &TreeModel, m: &FeatureMatrix) -> Vec<Vec<usize>> {
    let idx = SchemaIndex::new(m.features());
    let mut reach = vec![Vec::new(); tree.nodes().len()];
    for (r, row) in m.rows().iter().enumerate() {
        let mut i = 0;
        loop {
            reach[i].push(r);
            match &tree.nodes()[i] {
                TreeNode::Leaf { .. } => break,
                TreeNode::Split { condition, left, right } => {
                    let go = condition.evaluate(idx.row(&row.values).get(&condition.feature)).unwrap();
                    i = if go { *left } else { *right };
                }
            }
        }
    }
    reach
}

/// Row indices reaching each ADTree prediction node, in preorder.
fn adtree_partition(model: &AdTreeModel, m: &FeatureMatrix) -> Vec<Vec<usize>> {
    fn walk(node: &PredictionNode, rows: Vec<usize>, m: &FeatureMatrix, idx: &SchemaIndex, out: &mut Vec<Vec<usize>>) {
        out.push(rows.clone());
        for s in &node.splitters {
            let (yes, no): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| {
                let row = idx.row(&m.rows()[r].values);
                s.condition.evaluate(row.get(&s.condition.feature)) == Some(true)
            });
            walk(&s.yes, yes, m, idx, out);
            walk(&s.no, no, m, idx, out);
        }
    }
    let idx = SchemaIndex::new(m.features());
    let mut out = Vec::new();
    walk(&model.root, (0..m.len()).collect(), m, &idx, &mut out);
    out
}

fn gini(rows: &[usize], labels: &[u8]) -> f64 {
    let p = rows.iter().filter(|&&r| labels[r] == 1).count() as f64;
    let n = rows.len() as f64 - p;
    if p + n == 0.0 {
        0.0
    } else {
        2.0 * p * n / (p + n)
    }
}

/// Small balanced train/test matrices from generated churn data.
fn planted(seed: u64, consumers: usize) -> (FeatureMatrix, FeatureMatrix) {
    let cfg = GeneratorConfig {
        seed,
        n_consumers: consumers,
        n_smes: 0,
        ..GeneratorConfig::default()
    };
    let data = generate(&cfg).unwrap();
    let pop = Population::all();
    let train_m = extract_churn(&data, &standard_windows(Task::Churn, Role::Train), pop).unwrap();
    let test_m = extract_churn(&data, &standard_windows(Task::Churn, Role::Test), pop).unwrap();
    let test_m = test_m.conform_to(train_m.features()).unwrap();
    (undersample(&train_m, seed).unwrap(), undersample(&test_m, seed + 1).unwrap())
}

#[test]
fn stump_finds_midpoint_threshold() {
    let m = numeric_matrix(1, &[(vec![1.0], 0), (vec![2.0], 0), (vec![3.0], 1), (vec![4.0], 1)]);
    let model = train(&m, &spec(Algorithm::Stump)).unwrap();
    let tree = tree_of(&model);
    let conditions: Vec<_> = tree.splits().collect();
    assert_eq!(conditions.len(), 1);
    assert_eq!(conditions[0].test, Test::Less(2.5));
    assert_eq!(accuracy(&model, &m), 1.0);
}

#[test]
fn constant_feature_gives_majority_leaf() {
    let m = numeric_matrix(1, &[(vec![7.0], 1), (vec![7.0], 1), (vec![7.0], 0)]);
    let model = train(&m, &spec(Algorithm::Cart)).unwrap();
    assert_eq!(tree_of(&model).nodes().len(), 1);
    assert!(predictions(&model, &m).iter().all(|&(_, c)| c == 1));
}

#[test]
fn single_class_training_is_constant() {
    let m = numeric_matrix(1, &[(vec![1.0], 0), (vec![2.0], 0)]);
    for a in Algorithm::ALL {
        let model = train(&m, &spec(a)).unwrap();
        assert!(predictions(&model, &m).iter().all(|&(_, c)| c == 0), "{a}");
    }
}

#[test]
fn label_flip_swaps_predictions() {
    for seed in 0..10 {
        let m = random_matrix(seed, 80, 3);
        let flipped_rows: Vec<Row> = m
            .rows()
            .iter()
            .map(|r| Row {
                label: r.label.map(|y| 1 - y),
                ..r.clone()
            })
            .collect();
        let flipped = FeatureMatrix::from_rows(m.features().to_vec(), flipped_rows).unwrap();
        for a in [Algorithm::Stump, Algorithm::Cart] {
            let s = LearnerSpec { max_depth: 4, ..spec(a) };
            let base = train(&m, &s).unwrap();
            let flip = train(&flipped, &s).unwrap();
            for ((p, c), (q, d)) in predictions(&base, &m).into_iter().zip(predictions(&flip, &m)) {
                assert!((p - (1.0 - q)).abs() < 1e-12);
                // an exact 0.5 leaf predicts class 0 under both labelings
                if p != 0.5 {
                    assert_eq!(c, 1 - d, "{a} seed {seed}");
                }
            }
        }
    }
}

#[test]
fn scaling_a_feature_preserves_partitions() {
    for seed in 0..10 {
        let m = random_matrix(100 + seed, 60, 3);
        let scaled_rows: Vec<Row> = m
            .rows()
            .iter()
            .map(|r| {
                let mut values = r.values.clone();
                values[0] = Value::Num(values[0].as_num().unwrap() * 37.5);
                Row { values, ..r.clone() }
            })
            .collect();
        let scaled = FeatureMatrix::from_rows(m.features().to_vec(), scaled_rows).unwrap();
        for a in [Algorithm::Stump, Algorithm::Cart] {
            let s = LearnerSpec {
                max_depth: 4,
                min_leaf: 1,
                ..spec(a)
            };
            let (t1, t2) = (train(&m, &s).unwrap(), train(&scaled, &s).unwrap());
            assert_eq!(tree_partition(tree_of(&t1), &m), tree_partition(tree_of(&t2), &scaled));
        }
        let s = LearnerSpec {
            n_boost_rounds: 8,
            ..spec(Algorithm::AdTree)
        };
        let (Model::AdTree(a1), Model::AdTree(a2)) = (train(&m, &s).unwrap().model, train(&scaled, &s).unwrap().model) else {
            panic!("adtree expected");
        };
        assert_eq!(adtree_partition(&a1, &m), adtree_partition(&a2, &scaled));
    }
}

#[test]
fn splits_never_increase_gini() {
    let m = random_matrix(7, 300, 4);
    let labels = m.labels().unwrap();
    let model = train(
        &m,
        &LearnerSpec {
            max_depth: 8,
            min_leaf: 1,
            ..spec(Algorithm::Cart)
        },
    )
    .unwrap();
    let tree = tree_of(&model);
    let reach = tree_partition(tree, &m);
    for (i, node) in tree.nodes().iter().enumerate() {
        if let TreeNode::Split { left, right, .. } = node {
            let parent = gini(&reach[i], &labels);
            let children = gini(&reach[*left], &labels) + gini(&reach[*right], &labels);
            assert!(children <= parent + 1e-9, "node {i}: {children} > {parent}");
        }
    }
}

#[test]
fn training_is_deterministic_across_thread_counts() {
    let m = random_matrix(3, 200, 5);
    for a in Algorithm::ALL {
        let s = spec(a);
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| train(&m, &s).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(4), "{a}");
        assert_eq!(one, run(1), "{a}");
    }
}

#[test]
fn single_unbootstrapped_tree_equals_cart() {
    let m = random_matrix(5, 150, 4);
    let cart = train(&m, &spec(Algorithm::Cart)).unwrap();
    let bag = train(
        &m,
        &LearnerSpec {
            n_trees: 1,
            bootstrap: false,
            ..spec(Algorithm::BaggingCart)
        },
    )
    .unwrap();
    assert_eq!(predictions(&cart, &m), predictions(&bag, &m));
}

#[test]
fn adaboost_stops_after_perfect_first_member() {
    let m = numeric_matrix(1, &[(vec![1.0], 0), (vec![2.0], 0), (vec![3.0], 1), (vec![4.0], 1)]);
    let model = train(&m, &spec(Algorithm::AdaBoostStump)).unwrap();
    let Model::Ensemble(e) = &model.model else {
        panic!("ensemble expected")
    };
    assert_eq!(e.members.len(), 1);
    assert!(e.weights[0] > 0.0 && e.weights[0].is_finite());
    assert_eq!(accuracy(&model, &m), 1.0);
}

#[test]
fn adaboost_improves_on_its_stump() {
    let m = random_matrix(9, 300, 3);
    let stump = accuracy(&train(&m, &spec(Algorithm::Stump)).unwrap(), &m);
    let boosted = accuracy(
        &train(
            &m,
            &LearnerSpec {
                n_boost_rounds: 30,
                ..spec(Algorithm::AdaBoostStump)
            },
        )
        .unwrap(),
        &m,
    );
    assert!(boosted > stump, "{boosted} <= {stump}");
}

#[test]
fn adtree_scores_are_finite() {
    let m = random_matrix(21, 120, 3);
    let model = train(
        &m,
        &LearnerSpec {
            n_boost_rounds: 25,
            ..spec(Algorithm::AdTree)
        },
    )
    .unwrap();
    assert!(predictions(&model, &m).iter().all(|(s, _)| s.is_finite()));
}

#[test]
fn adtree_training_error_is_monotone_on_planted_data() {
    let (train_m, _) = planted(5, 3000);
    let mut previous = f64::INFINITY;
    for rounds in 0..=15 {
        let model = train(
            &train_m,
            &LearnerSpec {
                n_boost_rounds: rounds,
                ..spec(Algorithm::AdTree)
            },
        )
        .unwrap();
        let err = 1.0 - accuracy(&model, &train_m);
        assert!(err <= previous + 1e-12, "round {rounds}: error {err} > {previous}");
        previous = err;
    }
}

#[test]
fn adtree_top_splitters_use_usage_features() {
    let (train_m, _) = planted(6, 3000);
    let model = train(
        &train_m,
        &LearnerSpec {
            n_boost_rounds: 10,
            ..spec(Algorithm::AdTree)
        },
    )
    .unwrap();
    let Model::AdTree(t) = &model.model else {
        panic!("adtree expected")
    };
    let usage = |f: &str| f.starts_with("DL") || f.starts_with("UL") || f.starts_with("3M_");
    let top: Vec<&str> = t.root.splitters.iter().map(|s| s.condition.feature.as_str()).collect();
    assert!(usage(top[0]), "first splitter on {}", top[0]);
    assert!(top.iter().filter(|f| usage(f)).count() * 2 > top.len(), "{top:?}");
}

#[test]
fn forest_beats_stump_on_planted_data() {
    let (train_m, test_m) = planted(8, 4000);
    let stump = accuracy(&train(&train_m, &spec(Algorithm::Stump)).unwrap(), &test_m);
    let forest = accuracy(&train(&train_m, &spec(Algorithm::RandomForest)).unwrap(), &test_m);
    assert!(forest > stump, "forest {forest} vs stump {stump}");
}

#[test]
fn predicting_requires_the_training_schema() {
    let m = random_matrix(1, 20, 2);
    let model = train(&m, &spec(Algorithm::Stump)).unwrap();
    let other = numeric_matrix(1, &[(vec![1.0], 0)]);
    assert!(model.predict_matrix(&other).is_err());
}
