//! Binary classification trees grown greedily on weighted Gini impurity.
//! A decision stump is the depth-1 case.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use super::condition::SplitCondition;
use super::data::TrainSet;
use super::split::{best_split, gini_cost};
use crate::features::{RowRef, Value};

#[derive(Clone, Debug, PartialEq)]
pub enum TreeNode {
    /// Class-1 probability at the leaf; class 0 has the complement.
    Leaf { p1: f64 },
    /// `left` holds the rows satisfying `condition`.
    Split {
        condition: SplitCondition,
        left: usize,
        right: usize,
    },
}

/// Nodes in preorder; the root is `nodes[0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeModel {
    nodes: Vec<TreeNode>,
}

impl TreeModel {
    pub fn constant(p1: f64) -> Self {
        Self {
            nodes: vec![TreeNode::Leaf { p1 }],
        }
    }

    /// Checks that children point forward, every node is reachable once and
    /// leaf probabilities lie in `[0, 1]`.
    pub fn from_nodes(nodes: Vec<TreeNode>) -> Result<Self, String> {
        if nodes.is_empty() {
            return Err("tree has no nodes".into());
        }
        let mut parents = vec![0usize; nodes.len()];
        for (i, n) in nodes.iter().enumerate() {
            match n {
                TreeNode::Leaf { p1 } => {
                    if !(0.0..=1.0).contains(p1) {
                        return Err(format!("node {i}: leaf probability {p1} outside [0, 1]"));
                    }
                }
                TreeNode::Split { left, right, condition } => {
                    if condition.missing_goes.is_none() {
                        return Err(format!("node {i}: split needs a missing-value branch"));
                    }
                    for &c in [left, right] {
                        if c <= i || c >= nodes.len() {
                            return Err(format!("node {i}: child {c} out of order"));
                        }
                        parents[c] += 1;
                    }
                }
            }
        }
        if parents.iter().skip(1).any(|&p| p != 1) {
            return Err("every non-root node needs exactly one parent".into());
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn leaf_for(&self, row: RowRef<'_>) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { .. } => return i,
                TreeNode::Split { condition, left, right } => {
                    let go_left = condition.evaluate(row.get(&condition.feature)).unwrap_or(false);
                    i = if go_left { *left } else { *right };
                }
            }
        }
    }

    pub fn probability(&self, row: RowRef<'_>) -> f64 {
        match self.nodes[self.leaf_for(row)] {
            TreeNode::Leaf { p1 } => p1,
            TreeNode::Split { .. } => unreachable!("leaf_for returns a leaf"),
        }
    }

    /// Class-1 probability for training row `row`.
    pub(crate) fn probability_at(&self, data: &TrainSet, row: usize) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { p1 } => return *p1,
                TreeNode::Split { condition, left, right } => {
                    let value = data
                        .feature_index(&condition.feature)
                        .map_or(Value::Missing, |f| data.value_at(f, row));
                    i = if condition.evaluate(&value).unwrap_or(false) {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn splits(&self) -> impl Iterator<Item = &SplitCondition> {
        self.nodes.iter().filter_map(|n| match n {
            TreeNode::Split { condition, .. } => Some(condition),
            TreeNode::Leaf { .. } => None,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct GrowParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Random feature subset size per split (random forest); `None` = all.
    pub features_per_split: Option<usize>,
}

/// Grows a tree on `samples` (row indices, repeats allowed) with per-row
/// `weights`. Impure nodes split whenever a valid split exists within the
/// depth and leaf-size limits.
pub(crate) fn grow(data: &TrainSet, samples: Vec<usize>, weights: &[f64], params: GrowParams, rng: Option<&mut ChaCha8Rng>) -> TreeModel {
    let mut builder = Builder {
        data,
        weights,
        params,
        rng,
        nodes: Vec::new(),
    };
    builder.node(samples, 0);
    TreeModel { nodes: builder.nodes }
}

struct Builder<'a, 'r> {
    data: &'a TrainSet,
    weights: &'a [f64],
    params: GrowParams,
    rng: Option<&'r mut ChaCha8Rng>,
    nodes: Vec<TreeNode>,
}

impl Builder<'_, '_> {
    fn node(&mut self, samples: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let (pos, neg) = samples.iter().fold((0.0, 0.0), |(p, n), &i| {
            let w = self.weights[i];
            if self.data.labels[i] == 1 {
                (p + w, n)
            } else {
                (p, n + w)
            }
        });
        let p1 = if pos + neg > 0.0 { pos / (pos + neg) } else { 0.5 };
        self.nodes.push(TreeNode::Leaf { p1 });
        if depth >= self.params.max_depth || pos == 0.0 || neg == 0.0 {
            return id;
        }

        let features = self.candidate_features();
        let Some(best) = best_split(self.data, &features, &samples, self.weights, self.params.min_leaf, &gini_cost) else {
            return id;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = samples.iter().partition(|&&i| best.split.goes_left(self.data, i));
        drop(samples);
        let left_id = self.node(left, depth + 1);
        let right_id = self.node(right, depth + 1);
        let condition = best.split.to_condition(self.data);
        self.nodes[id] = TreeNode::Split {
            condition,
            left: left_id,
            right: right_id,
        };
        id
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let all = &self.data.by_name;
        match (self.params.features_per_split, self.rng.as_deref_mut()) {
            (Some(k), Some(rng)) if k < all.len() => {
                let mut picked = all.clone();
                picked.shuffle(rng);
                picked.truncate(k);
                // restore name order for the tie rule
                picked.sort_by(|&a, &b| self.data.names[a].cmp(&self.data.names[b]));
                picked
            }
            _ => all.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureDef, FeatureMatrix, Row, SchemaIndex, Value};
    use crate::learners::Branch;

    fn matrix(points: &[(&[f64], u8)]) -> FeatureMatrix {
        let n = points[0].0.len();
        let features = (0..n).map(|j| FeatureDef::numeric(format!("x{j}"))).collect();
        let rows = points
            .iter()
            .enumerate()
            .map(|(i, (x, y))| Row {
                billing_id: format!("B{i}"),
                values: x.iter().map(|&v| Value::Num(v)).collect(),
                label: Some(*y),
            })
            .collect();
        FeatureMatrix::from_rows(features, rows).unwrap()
    }

    fn fit(m: &FeatureMatrix, max_depth: usize) -> TreeModel {
        let data = TrainSet::new(m).unwrap();
        let weights = vec![1.0; data.len()];
        grow(
            &data,
            (0..data.len()).collect(),
            &weights,
            GrowParams {
                max_depth,
                min_leaf: 1,
                features_per_split: None,
            },
            None,
        )
    }

    fn accuracy(t: &TreeModel, m: &FeatureMatrix) -> f64 {
        let idx = SchemaIndex::new(m.features());
        let hits = m
            .rows()
            .iter()
            .filter(|r| u8::from(t.probability(idx.row(&r.values)) > 0.5) == r.label.unwrap())
            .count();
        hits as f64 / m.len() as f64
    }

    #[test]
    fn xor_needs_depth_two() {
        let m = matrix(&[(&[0.0, 0.0], 0), (&[0.0, 1.0], 1), (&[1.0, 0.0], 1), (&[1.0, 1.0], 0)]);
        assert_eq!(accuracy(&fit(&m, 1), &m), 0.5);
        assert_eq!(accuracy(&fit(&m, 2), &m), 1.0);
    }

    #[test]
    fn from_nodes_rejects_bad_shapes() {
        let c = SplitCondition::less("x", 1.0, Some(Branch::Left));
        assert!(TreeModel::from_nodes(vec![]).is_err());
        assert!(TreeModel::from_nodes(vec![TreeNode::Leaf { p1: 1.5 }]).is_err());
        assert!(TreeModel::from_nodes(vec![
            TreeNode::Split {
                condition: c.clone(),
                left: 0,
                right: 1
            },
            TreeNode::Leaf { p1: 0.0 }
        ])
        .is_err());
        let ok = vec![
            TreeNode::Split {
                condition: c,
                left: 1,
                right: 2,
            },
            TreeNode::Leaf { p1: 0.0 },
            TreeNode::Leaf { p1: 1.0 },
        ];
        assert_eq!(TreeModel::from_nodes(ok).unwrap().depth(), 1);
    }
}
