//! Flat feature matrices keyed by billing id, and the windowed extraction
//! that builds them from a [`TelcoDataset`](crate::telco::TelcoDataset).

mod extract;
mod window;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};

use crate::error::FeatureError;

pub use extract::{derive, extract_churn, extract_winback, feature_schema, Aggregates, Derived, Population, SubscriberAttrs};
pub use window::{standard_windows, Role, Task, WindowSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FeatureDef {
    pub name: String,
    pub kind: FeatureKind,
}

impl FeatureDef {
    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Numeric,
        }
    }

    pub fn categorical(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Categorical,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Num(f64),
    Cat(String),
    Missing,
}

impl Value {
    pub fn as_num(&self) -> Option<f64> {
        match self {
            Value::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }
}

impl From<Option<f64>> for Value {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Value::Missing, Value::Num)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(v) => write!(f, "{v}"),
            Value::Cat(c) => f.write_str(c),
            Value::Missing => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub billing_id: String,
    pub values: Vec<Value>,
    pub label: Option<u8>,
}

/// Named feature columns and one row per billing id. Extraction produces
/// unique billing ids; oversampled matrices repeat rows verbatim.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    features: Vec<FeatureDef>,
    rows: Vec<Row>,
}

impl FeatureMatrix {
    pub fn new(features: Vec<FeatureDef>) -> Self {
        Self {
            features,
            rows: Vec::new(),
        }
    }

    pub fn from_rows(features: Vec<FeatureDef>, rows: Vec<Row>) -> Result<Self, FeatureError> {
        let mut m = Self::new(features);
        for r in rows {
            m.push(r)?;
        }
        Ok(m)
    }

    pub fn push(&mut self, row: Row) -> Result<(), FeatureError> {
        if row.values.len() != self.features.len() {
            return Err(FeatureError::SchemaMismatch(format!(
                "row {} has {} values, schema has {} features",
                row.billing_id,
                row.values.len(),
                self.features.len()
            )));
        }
        if let Some(l) = row.label {
            if l > 1 {
                return Err(FeatureError::Malformed(format!(
                    "row {} has label {l}, expected 0 or 1",
                    row.billing_id
                )));
            }
        }
        for (v, f) in row.values.iter().zip(&self.features) {
            let ok = match (v, f.kind) {
                (Value::Missing, _) => true,
                (Value::Num(x), FeatureKind::Numeric) => x.is_finite(),
                (Value::Cat(_), FeatureKind::Categorical) => true,
                _ => false,
            };
            if !ok {
                return Err(FeatureError::SchemaMismatch(format!(
                    "row {}: value {v:?} does not fit feature {}",
                    row.billing_id, f.name
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn features(&self) -> &[FeatureDef] {
        &self.features
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    /// Rows at `indices`, in that order (repeats allowed).
    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            features: self.features.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Same rows with labels dropped.
    pub fn without_labels(&self) -> FeatureMatrix {
        let rows = self.rows.iter().map(|r| Row { label: None, ..r.clone() }).collect();
        FeatureMatrix {
            features: self.features.clone(),
            rows,
        }
    }

    /// `(class 0 count, class 1 count)`; `None` if any row is unlabeled.
    pub fn class_counts(&self) -> Option<(usize, usize)> {
        self.rows.iter().try_fold((0, 0), |(n0, n1), r| match r.label? {
            0 => Some((n0 + 1, n1)),
            _ => Some((n0, n1 + 1)),
        })
    }

    pub fn labels(&self) -> Option<Vec<u8>> {
        self.rows.iter().map(|r| r.label).collect()
    }

    pub fn sort_by_billing_id(&mut self) {
        self.rows.sort_by(|a, b| a.billing_id.cmp(&b.billing_id));
    }

    pub fn has_unique_billing_ids(&self) -> bool {
        let mut seen = HashSet::new();
        self.rows.iter().all(|r| seen.insert(r.billing_id.as_str()))
    }

    /// Renames columns to `schema` when only the names differ, e.g. test-window
    /// month stamps versus the training window's. Kinds and arity must match.
    pub fn conform_to(&self, schema: &[FeatureDef]) -> Result<FeatureMatrix, FeatureError> {
        if schema.len() != self.features.len() {
            return Err(FeatureError::SchemaMismatch(format!(
                "expected {} features, matrix has {}",
                schema.len(),
                self.features.len()
            )));
        }
        for (a, b) in schema.iter().zip(&self.features) {
            if a.kind != b.kind {
                return Err(FeatureError::SchemaMismatch(format!(
                    "feature {} is {:?} but {} is {:?}",
                    a.name, a.kind, b.name, b.kind
                )));
            }
        }
        Ok(FeatureMatrix {
            features: schema.to_vec(),
            rows: self.rows.clone(),
        })
    }

    /// CSV with header `billing_id,<features...>,label`; missing values and
    /// absent labels are empty fields.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), FeatureError> {
        let err = |e: csv::Error| FeatureError::Malformed(e.to_string());
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let mut header = vec!["billing_id".to_string()];
        header.extend(self.features.iter().map(|f| f.name.clone()));
        header.push("label".into());
        w.write_record(&header).map_err(err)?;
        for r in &self.rows {
            let mut rec = vec![r.billing_id.clone()];
            rec.extend(r.values.iter().map(|v| v.to_string()));
            rec.push(r.label.map(|l| l.to_string()).unwrap_or_default());
            w.write_record(&rec).map_err(err)?;
        }
        w.flush().map_err(|e| FeatureError::Malformed(e.to_string()))
    }

    /// Reads [`write_csv`](Self::write_csv) output. A column is categorical
    /// when any of its non-empty values is not a number.
    pub fn read_csv<R: Read>(input: R) -> Result<FeatureMatrix, FeatureError> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| FeatureError::Malformed(format!("line 1: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        if header.len() < 2 || header[0] != "billing_id" || header.last().map(String::as_str) != Some("label") {
            return Err(FeatureError::Malformed(
                "line 1: header must be billing_id,<features...>,label".into(),
            ));
        }
        let names = &header[1..header.len() - 1];
        let mut raw = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| FeatureError::Malformed(e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() != header.len() {
                return Err(FeatureError::Malformed(format!(
                    "line {line}: expected {} fields, found {}",
                    header.len(),
                    rec.len()
                )));
            }
            raw.push((line, rec));
        }
        let kinds: Vec<FeatureKind> = (0..names.len())
            .map(|j| {
                let numeric = raw.iter().all(|(_, r)| {
                    let v = &r[j + 1];
                    v.is_empty() || v.parse::<f64>().is_ok_and(f64::is_finite)
                });
                if numeric {
                    FeatureKind::Numeric
                } else {
                    FeatureKind::Categorical
                }
            })
            .collect();
        let features = names
            .iter()
            .zip(&kinds)
            .map(|(n, &kind)| FeatureDef { name: n.clone(), kind })
            .collect();
        let mut m = FeatureMatrix::new(features);
        for (line, rec) in raw {
            let values = kinds
                .iter()
                .enumerate()
                .map(|(j, kind)| {
                    let v = &rec[j + 1];
                    match (v.is_empty(), kind) {
                        (true, _) => Value::Missing,
                        (false, FeatureKind::Numeric) => Value::Num(v.parse().expect("checked numeric")),
                        (false, FeatureKind::Categorical) => Value::Cat(v.to_string()),
                    }
                })
                .collect();
            let label = match &rec[header.len() - 1] {
                "" => None,
                "0" => Some(0),
                "1" => Some(1),
                other => {
                    return Err(FeatureError::Malformed(format!(
                        "line {line}: label must be 0, 1 or empty, got {other:?}"
                    )))
                }
            };
            m.push(Row {
                billing_id: rec[0].to_string(),
                values,
                label,
            })
            .map_err(|e| FeatureError::Malformed(format!("line {line}: {e}")))?;
        }
        Ok(m)
    }
}

/// Name → column index lookup for scoring rows against models that refer to
/// features by name. Absent names read as missing.
#[derive(Clone, Debug)]
pub struct SchemaIndex {
    index: HashMap<String, usize>,
}

impl SchemaIndex {
    pub fn new(features: &[FeatureDef]) -> Self {
        Self {
            index: features.iter().enumerate().map(|(i, f)| (f.name.clone(), i)).collect(),
        }
    }

    pub fn row<'a>(&'a self, values: &'a [Value]) -> RowRef<'a> {
        RowRef { schema: self, values }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RowRef<'a> {
    schema: &'a SchemaIndex,
    values: &'a [Value],
}

impl RowRef<'_> {
    pub fn get(&self, feature: &str) -> &Value {
        self.schema.index.get(feature).map_or(&Value::Missing, |&i| &self.values[i])
    }
}
