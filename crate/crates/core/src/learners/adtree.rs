//! Alternating decision trees.
//!
//! A model alternates prediction nodes (a real value) and splitter nodes (a
//! condition with one prediction node per outcome). A row's score is the sum
//! of the values of every prediction node it reaches: the root, plus for
//! each splitter under a reached prediction node, the child on the side the
//! row satisfies. Positive scores predict class 1. A splitter whose
//! condition has no answer for the row (missing value, no missing branch)
//! contributes nothing.
//!
//! Training is boosting over (prediction node, condition) pairs. Each round
//! picks the pair minimising
//! `Z = 2 (sqrt(W+(p&c) W-(p&c)) + sqrt(W+(p&!c) W-(p&!c))) + W(!p)`,
//! attaches prediction values `0.5 ln((W+ + 1) / (W- + 1))` to both outcomes
//! and reweights the affected rows by `exp(-y a)`.

use super::condition::SplitCondition;
use super::data::{Column, TrainSet, MISSING_CODE};
use super::split::{is_better, scan_categorical, scan_numeric, Candidate, Mass};
use crate::features::RowRef;

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionNode {
    pub value: f64,
    pub splitters: Vec<Splitter>,
}

impl PredictionNode {
    pub fn leaf(value: f64) -> Self {
        Self {
            value,
            splitters: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Splitter {
    /// Insertion order, starting at 1.
    pub index: usize,
    pub condition: SplitCondition,
    pub yes: PredictionNode,
    pub no: PredictionNode,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdTreeModel {
    pub root: PredictionNode,
}

impl AdTreeModel {
    pub fn root_only(value: f64) -> Self {
        Self {
            root: PredictionNode::leaf(value),
        }
    }

    pub fn root_value(&self) -> f64 {
        self.root.value
    }

    /// Sum of reached prediction values, accumulated in preorder.
    pub fn score(&self, row: RowRef<'_>) -> f64 {
        let mut total = 0.0;
        let mut stack = vec![&self.root];
        while let Some(node) = stack.pop() {
            total += node.value;
            for s in node.splitters.iter().rev() {
                match s.condition.evaluate(row.get(&s.condition.feature)) {
                    Some(true) => stack.push(&s.yes),
                    Some(false) => stack.push(&s.no),
                    None => {}
                }
            }
        }
        total
    }

    /// Splitters in preorder.
    pub fn splitters(&self) -> Vec<&Splitter> {
        fn walk<'a>(node: &'a PredictionNode, out: &mut Vec<&'a Splitter>) {
            for s in &node.splitters {
                out.push(s);
                walk(&s.yes, out);
                walk(&s.no, out);
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }
}

fn prediction_value(m: &Mass) -> f64 {
    0.5 * ((m.pos + 1.0) / (m.neg + 1.0)).ln()
}

struct ArenaPrediction {
    value: f64,
    members: Vec<usize>,
    splitters: Vec<usize>,
}

struct ArenaSplitter {
    index: usize,
    condition: SplitCondition,
    yes: usize,
    no: usize,
}

/// Result of one boosting round, exposed for white-box tests.
pub(crate) struct RoundChoice {
    pub node: usize,
    pub candidate: Candidate,
}

pub(crate) struct AdTreeTrainer<'a> {
    data: &'a TrainSet,
    weights: Vec<f64>,
    /// Per numeric feature: non-missing rows sorted by value.
    sorted: Vec<Option<Vec<usize>>>,
    predictions: Vec<ArenaPrediction>,
    splitters: Vec<ArenaSplitter>,
}

impl<'a> AdTreeTrainer<'a> {
    pub fn new(data: &'a TrainSet) -> Self {
        let sorted = data
            .columns
            .iter()
            .map(|c| match c {
                Column::Numeric(v) => {
                    let mut idx: Vec<usize> = (0..v.len()).filter(|&i| !v[i].is_nan()).collect();
                    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
                    Some(idx)
                }
                Column::Categorical { .. } => None,
            })
            .collect();
        let mut weights = vec![1.0; data.len()];
        let mut all = Mass::default();
        for (i, &y) in data.labels.iter().enumerate() {
            all.add(y, weights[i]);
        }
        let root = prediction_value(&all);
        for (w, &y) in weights.iter_mut().zip(&data.labels) {
            *w *= (-sign(y) * root).exp();
        }
        let root = ArenaPrediction {
            value: root,
            members: (0..data.len()).collect(),
            splitters: Vec::new(),
        };
        Self {
            data,
            weights,
            sorted,
            predictions: vec![root],
            splitters: Vec::new(),
        }
    }

    #[cfg(test)]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Minimum-Z (prediction node, condition) pair for the next round.
    pub fn choose(&self) -> Option<RoundChoice> {
        let total: f64 = self.weights.iter().sum();
        let mut best: Option<RoundChoice> = None;
        let mut in_node = vec![false; self.data.len()];
        for (p, node) in self.predictions.iter().enumerate() {
            in_node.iter_mut().for_each(|b| *b = false);
            let mut node_weight = 0.0;
            for &i in &node.members {
                in_node[i] = true;
                node_weight += self.weights[i];
            }
            let outside = total - node_weight;
            let z = |l: &Mass, r: &Mass| 2.0 * ((l.pos * l.neg).sqrt() + (r.pos * r.neg).sqrt()) + outside;
            for &f in &self.data.by_name {
                if let Some(c) = self.best_for(f, node, &in_node, &z) {
                    if best.as_ref().is_none_or(|b| is_better(c.cost, b.candidate.cost)) {
                        best = Some(RoundChoice { node: p, candidate: c });
                    }
                }
            }
        }
        best
    }

    fn best_for(&self, feature: usize, node: &ArenaPrediction, in_node: &[bool], z: &impl Fn(&Mass, &Mass) -> f64) -> Option<Candidate> {
        let labels = &self.data.labels;
        let mut missing = Mass::default();
        match &self.data.columns[feature] {
            Column::Numeric(values) => {
                let order = self.sorted[feature].as_ref().expect("numeric columns are presorted");
                let entries: Vec<(f64, u8, f64)> = order
                    .iter()
                    .filter(|&&i| in_node[i])
                    .map(|&i| (values[i], labels[i], self.weights[i]))
                    .collect();
                for &i in &node.members {
                    if values[i].is_nan() {
                        missing.add(labels[i], self.weights[i]);
                    }
                }
                scan_numeric(feature, &entries, missing, 1, z)
            }
            Column::Categorical { codes, levels } => {
                let mut per_level = vec![Mass::default(); levels.len()];
                for &i in &node.members {
                    match codes[i] {
                        MISSING_CODE => missing.add(labels[i], self.weights[i]),
                        c => per_level[c as usize].add(labels[i], self.weights[i]),
                    }
                }
                scan_categorical(feature, &per_level, missing, 1, z)
            }
        }
    }

    /// Runs one boosting round; `false` when no split remains.
    pub fn step(&mut self) -> bool {
        let Some(choice) = self.choose() else {
            return false;
        };
        let split = &choice.candidate.split;
        let (a_yes, a_no) = (prediction_value(&choice.candidate.left), prediction_value(&choice.candidate.right));
        let (yes, no): (Vec<usize>, Vec<usize>) = self.predictions[choice.node]
            .members
            .iter()
            .partition(|&&i| split.goes_left(self.data, i));
        for (rows, a) in [(&yes, a_yes), (&no, a_no)] {
            for &i in rows {
                self.weights[i] *= (-sign(self.data.labels[i]) * a).exp();
            }
        }
        let yes_id = self.predictions.len();
        self.predictions.push(ArenaPrediction {
            value: a_yes,
            members: yes,
            splitters: Vec::new(),
        });
        self.predictions.push(ArenaPrediction {
            value: a_no,
            members: no,
            splitters: Vec::new(),
        });
        let sid = self.splitters.len();
        self.splitters.push(ArenaSplitter {
            index: sid + 1,
            condition: split.to_condition(self.data),
            yes: yes_id,
            no: yes_id + 1,
        });
        self.predictions[choice.node].splitters.push(sid);
        true
    }

    pub fn finish(&self) -> AdTreeModel {
        AdTreeModel { root: self.build(0) }
    }

    fn build(&self, p: usize) -> PredictionNode {
        let node = &self.predictions[p];
        PredictionNode {
            value: node.value,
            splitters: node
                .splitters
                .iter()
                .map(|&s| {
                    let s = &self.splitters[s];
                    Splitter {
                        index: s.index,
                        condition: s.condition.clone(),
                        yes: self.build(s.yes),
                        no: self.build(s.no),
                    }
                })
                .collect(),
        }
    }
}

fn sign(label: u8) -> f64 {
    if label == 1 {
        1.0
    } else {
        -1.0
    }
}

pub(crate) fn train(data: &TrainSet, rounds: usize) -> AdTreeModel {
    let mut trainer = AdTreeTrainer::new(data);
    for _ in 0..rounds {
        if !trainer.step() {
            break;
        }
    }
    trainer.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureDef, FeatureMatrix, Row, SchemaIndex, Value};
    use crate::learners::condition::{Branch, Test};

    fn matrix(xs: &[f64], ys: &[u8]) -> FeatureMatrix {
        let rows = xs
            .iter()
            .zip(ys)
            .enumerate()
            .map(|(i, (&x, &y))| Row {
                billing_id: format!("B{i}"),
                values: vec![Value::Num(x)],
                label: Some(y),
            })
            .collect();
        FeatureMatrix::from_rows(vec![FeatureDef::numeric("x")], rows).unwrap()
    }

    #[test]
    fn zero_rounds_on_balanced_data_scores_zero() {
        let m = matrix(&[1.0, 2.0, 3.0, 4.0], &[0, 1, 0, 1]);
        let model = train(&TrainSet::new(&m).unwrap(), 0);
        assert_eq!(model.root_value(), 0.0);
        let idx = SchemaIndex::new(m.features());
        assert!(m.rows().iter().all(|r| model.score(idx.row(&r.values)) == 0.0));
    }

    #[test]
    fn one_round_separable_bookkeeping() {
        // 3 negatives below 3.5, 3 positives above; root value 0 so weights stay 1
        let m = matrix(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &[0, 0, 0, 1, 1, 1]);
        let model = train(&TrainSet::new(&m).unwrap(), 1);
        assert_eq!(model.root_value(), 0.0);
        let s = &model.root.splitters[0];
        assert_eq!(s.index, 1);
        assert_eq!(s.condition.test, Test::Less(3.5));
        // W+ = 0, W- = 3 on the "< 3.5" side
        assert!((s.yes.value - 0.5 * (1.0f64 / 4.0).ln()).abs() < 1e-15);
        assert!((s.no.value - 0.5 * 4.0f64.ln()).abs() < 1e-15);
        assert!(s.yes.value < 0.0 && s.no.value > 0.0);
    }

    #[test]
    fn missing_branch_none_skips_splitter() {
        let model = AdTreeModel {
            root: PredictionNode {
                value: 0.25,
                splitters: vec![Splitter {
                    index: 1,
                    condition: SplitCondition::less("x", 1.0, None),
                    yes: PredictionNode::leaf(1.0),
                    no: PredictionNode::leaf(-1.0),
                }],
            },
        };
        let schema = [FeatureDef::numeric("x")];
        let idx = SchemaIndex::new(&schema);
        assert_eq!(model.score(idx.row(&[Value::Missing])), 0.25);
        assert_eq!(model.score(idx.row(&[Value::Num(0.0)])), 1.25);
        let mut routed = model.clone();
        routed.root.splitters[0].condition.missing_goes = Some(Branch::Right);
        assert_eq!(routed.score(idx.row(&[Value::Missing])), -0.75);
    }

    #[test]
    fn exponential_loss_never_increases() {
        let xs: Vec<f64> = (0..40).map(|i| ((i * 37) % 41) as f64).collect();
        let ys: Vec<u8> = xs.iter().map(|&x| u8::from((x as i64 % 7) < 3)).collect();
        let data = TrainSet::new(&matrix(&xs, &ys)).unwrap();
        let mut trainer = AdTreeTrainer::new(&data);
        let mut loss: f64 = trainer.weights().iter().sum();
        for _ in 0..15 {
            if !trainer.step() {
                break;
            }
            let next: f64 = trainer.weights().iter().sum();
            assert!(next <= loss + 1e-9, "{next} > {loss}");
            loss = next;
        }
    }
}
