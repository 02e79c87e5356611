//! Column-major view of a labeled [`FeatureMatrix`] used during training.

use crate::error::LearnError;
use crate::features::{FeatureKind, FeatureMatrix, Value};

use super::condition::{Branch, SplitCondition, Test};

pub(crate) const MISSING_CODE: u32 = u32::MAX;

pub(crate) enum Column {
    /// NaN marks a missing value.
    Numeric(Vec<f64>),
    /// Codes index `levels` (sorted); `MISSING_CODE` marks a missing value.
    Categorical { codes: Vec<u32>, levels: Vec<String> },
}

pub(crate) struct TrainSet {
    pub names: Vec<String>,
    pub columns: Vec<Column>,
    pub labels: Vec<u8>,
    /// Feature indices in ascending name order, the split tie-break order.
    pub by_name: Vec<usize>,
}

impl TrainSet {
    pub fn new(matrix: &FeatureMatrix) -> Result<Self, LearnError> {
        if matrix.is_empty() {
            return Err(LearnError::EmptyTrainingSet);
        }
        let labels = matrix
            .rows()
            .iter()
            .map(|r| r.label.ok_or_else(|| LearnError::Unlabeled(r.billing_id.clone())))
            .collect::<Result<Vec<u8>, _>>()?;
        let columns = matrix
            .features()
            .iter()
            .enumerate()
            .map(|(j, f)| match f.kind {
                FeatureKind::Numeric => Column::Numeric(matrix.rows().iter().map(|r| r.values[j].as_num().unwrap_or(f64::NAN)).collect()),
                FeatureKind::Categorical => {
                    let mut levels: Vec<String> = matrix
                        .rows()
                        .iter()
                        .filter_map(|r| match &r.values[j] {
                            Value::Cat(c) => Some(c.clone()),
                            _ => None,
                        })
                        .collect();
                    levels.sort();
                    levels.dedup();
                    let codes = matrix
                        .rows()
                        .iter()
                        .map(|r| match &r.values[j] {
                            Value::Cat(c) => levels.binary_search(c).expect("level collected") as u32,
                            _ => MISSING_CODE,
                        })
                        .collect();
                    Column::Categorical { codes, levels }
                }
            })
            .collect();
        let names: Vec<String> = matrix.features().iter().map(|f| f.name.clone()).collect();
        let mut by_name: Vec<usize> = (0..names.len()).collect();
        by_name.sort_by(|&a, &b| names[a].cmp(&names[b]));
        Ok(Self {
            names,
            columns,
            labels,
            by_name,
        })
    }

    /// Value of one training cell.
    pub fn value_at(&self, feature: usize, row: usize) -> Value {
        match &self.columns[feature] {
            Column::Numeric(v) if v[row].is_nan() => Value::Missing,
            Column::Numeric(v) => Value::Num(v[row]),
            Column::Categorical { codes, .. } if codes[row] == MISSING_CODE => Value::Missing,
            Column::Categorical { codes, levels } => Value::Cat(levels[codes[row] as usize].clone()),
        }
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.by_name
            .binary_search_by(|&i| self.names[i].as_str().cmp(name))
            .ok()
            .map(|k| self.by_name[k])
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }
}

/// A split test bound to a column of a [`TrainSet`].
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct BoundSplit {
    pub feature: usize,
    pub test: BoundTest,
    pub missing_left: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum BoundTest {
    Less(f64),
    Equals(u32),
}

impl BoundSplit {
    pub fn goes_left(&self, data: &TrainSet, row: usize) -> bool {
        match (&data.columns[self.feature], self.test) {
            (Column::Numeric(v), BoundTest::Less(t)) => {
                let x = v[row];
                if x.is_nan() {
                    self.missing_left
                } else {
                    x < t
                }
            }
            (Column::Categorical { codes, .. }, BoundTest::Equals(c)) => {
                let x = codes[row];
                if x == MISSING_CODE {
                    self.missing_left
                } else {
                    x == c
                }
            }
            _ => unreachable!("test kind matches column kind"),
        }
    }

    pub fn to_condition(&self, data: &TrainSet) -> SplitCondition {
        let feature = data.names[self.feature].clone();
        let missing_goes = Some(if self.missing_left { Branch::Left } else { Branch::Right });
        let test = match (&data.columns[self.feature], self.test) {
            (_, BoundTest::Less(t)) => Test::Less(t),
            (Column::Categorical { levels, .. }, BoundTest::Equals(c)) => Test::Equals(levels[c as usize].clone()),
            _ => unreachable!("equality tests only bind categorical columns"),
        };
        SplitCondition {
            feature,
            test,
            missing_goes,
        }
    }
}
