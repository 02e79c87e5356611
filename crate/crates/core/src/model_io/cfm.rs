//! Versioned, line-oriented container for every model type.
//!
//! Fields are tab-separated and floats use the shortest representation that
//! parses back to the same bits, so save/load is lossless. The last line is
//! `end`; a file without it is reported as truncated.
//!
//! Tabs are shown as two spaces below.
//!
//! ```text
//! churnforge-model v1
//! algorithm  cart
//! features  2
//! feature  numeric  DL1110
//! feature  categorical  T_Location
//! tree  3
//! split  1  2  DL1110  lt  0.5  left
//! leaf  0.25
//! leaf  0.9
//! end
//! ```
//!
//! Other model blocks: `adtree <n>` with a `root` line and one `splitter`
//! line per splitter in preorder (naming its parent splitter, 0 for the
//! root, and branch); `bayes` with `gaussian`/`categorical`/`level` lines;
//! `ensemble <kind> <n>` followed by `member <weight>` lines, each followed
//! by a nested `tree` block.

use std::collections::HashMap;
use std::fmt::Write;

use crate::error::ModelIoError;
use crate::features::{FeatureDef, FeatureKind};
use crate::learners::{
    AdTreeModel, Algorithm, BayesFeature, BayesModel, Branch, EnsembleKind, EnsembleModel, FittedModel, Model, PredictionNode,
    SplitCondition, Splitter, Test, TreeModel, TreeNode,
};

pub const HEADER: &str = "churnforge-model v1";

fn check_field(s: &str) -> Result<&str, ModelIoError> {
    if s.is_empty() || s.contains(['\t', '\n', '\r']) {
        Err(ModelIoError::Invalid(format!(
            "name {s:?} is empty or contains a tab or line break"
        )))
    } else {
        Ok(s)
    }
}

fn condition_fields(c: &SplitCondition) -> Result<String, ModelIoError> {
    let missing = match c.missing_goes {
        Some(Branch::Left) => "left",
        Some(Branch::Right) => "right",
        None => "none",
    };
    let feature = check_field(&c.feature)?;
    Ok(match &c.test {
        Test::Less(t) => format!("{feature}\tlt\t{t}\t{missing}"),
        Test::Equals(v) => format!("{feature}\teq\t{}\t{missing}", check_field(v)?),
    })
}

/// Serializes a fitted model. Empty ensembles are rejected.
pub fn to_text(model: &FittedModel) -> Result<String, ModelIoError> {
    let mut out = format!(
        "{HEADER}\nalgorithm\t{}\nfeatures\t{}\n",
        model.algorithm.id(),
        model.features.len()
    );
    for f in &model.features {
        let kind = match f.kind {
            FeatureKind::Numeric => "numeric",
            FeatureKind::Categorical => "categorical",
        };
        writeln!(out, "feature\t{kind}\t{}", check_field(&f.name)?).unwrap();
    }
    match &model.model {
        Model::Tree(t) => write_tree(t, &mut out)?,
        Model::AdTree(a) => write_adtree(a, &mut out)?,
        Model::Bayes(b) => write_bayes(b, &mut out)?,
        Model::Ensemble(e) => {
            if e.members.is_empty() {
                return Err(ModelIoError::Invalid("ensemble has no members".into()));
            }
            if e.weights.len() != e.members.len() {
                return Err(ModelIoError::Invalid("ensemble weights and members differ in number".into()));
            }
            writeln!(out, "ensemble\t{}\t{}", e.kind.as_str(), e.members.len()).unwrap();
            for (m, w) in e.members.iter().zip(&e.weights) {
                writeln!(out, "member\t{w}").unwrap();
                write_tree(m, &mut out)?;
            }
        }
    }
    out.push_str("end\n");
    Ok(out)
}

fn write_tree(t: &TreeModel, out: &mut String) -> Result<(), ModelIoError> {
    writeln!(out, "tree\t{}", t.nodes().len()).unwrap();
    for node in t.nodes() {
        match node {
            TreeNode::Leaf { p1 } => writeln!(out, "leaf\t{p1}").unwrap(),
            TreeNode::Split { condition, left, right } => {
                writeln!(out, "split\t{left}\t{right}\t{}", condition_fields(condition)?).unwrap()
            }
        }
    }
    Ok(())
}

fn write_adtree(a: &AdTreeModel, out: &mut String) -> Result<(), ModelIoError> {
    fn walk(node: &PredictionNode, parent: usize, branch: &str, out: &mut String) -> Result<(), ModelIoError> {
        for s in &node.splitters {
            writeln!(
                out,
                "splitter\t{}\t{parent}\t{branch}\t{}\t{}\t{}",
                s.index,
                condition_fields(&s.condition)?,
                s.yes.value,
                s.no.value
            )
            .unwrap();
            walk(&s.yes, s.index, "yes", out)?;
            walk(&s.no, s.index, "no", out)?;
        }
        Ok(())
    }
    writeln!(out, "adtree\t{}", a.splitters().len()).unwrap();
    writeln!(out, "root\t{}", a.root.value).unwrap();
    walk(&a.root, 0, "yes", out)
}

fn write_bayes(b: &BayesModel, out: &mut String) -> Result<(), ModelIoError> {
    writeln!(out, "bayes\t{}\t{}\t{}", b.class_counts[0], b.class_counts[1], b.features.len()).unwrap();
    for f in &b.features {
        match f {
            BayesFeature::Gaussian { feature, mean, var } => writeln!(
                out,
                "gaussian\t{}\t{}\t{}\t{}\t{}",
                check_field(feature)?,
                mean[0],
                mean[1],
                var[0],
                var[1]
            )
            .unwrap(),
            BayesFeature::Categorical { feature, levels, counts } => {
                writeln!(out, "categorical\t{}\t{}", check_field(feature)?, levels.len()).unwrap();
                for (l, c) in levels.iter().zip(counts) {
                    writeln!(out, "level\t{}\t{}\t{}", check_field(l)?, c[0], c[1]).unwrap();
                }
            }
        }
    }
    Ok(())
}

struct Reader<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn line_no(&self) -> usize {
        self.pos
    }

    fn err(&self, message: impl Into<String>) -> ModelIoError {
        ModelIoError::Parse {
            line: self.line_no(),
            message: message.into(),
        }
    }

    /// Next line split on tabs; its first field must be `tag`.
    fn expect(&mut self, tag: &str) -> Result<Vec<&'a str>, ModelIoError> {
        let line = *self
            .lines
            .get(self.pos)
            .ok_or_else(|| ModelIoError::Truncated(format!("expected a {tag:?} line")))?;
        self.pos += 1;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields[0] != tag {
            return Err(self.err(format!("expected {tag:?}, found {:?}", fields[0])));
        }
        Ok(fields[1..].to_vec())
    }

    fn arity(&self, fields: &[&str], n: usize) -> Result<(), ModelIoError> {
        if fields.len() == n {
            Ok(())
        } else {
            Err(self.err(format!("expected {n} fields, found {}", fields.len())))
        }
    }

    fn float(&self, s: &str) -> Result<f64, ModelIoError> {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.err(format!("bad number {s:?}")))
    }

    fn count(&self, s: &str) -> Result<usize, ModelIoError> {
        s.parse().map_err(|_| self.err(format!("bad count {s:?}")))
    }

    fn condition(&self, f: &[&str]) -> Result<SplitCondition, ModelIoError> {
        self.arity(f, 4)?;
        let missing = match f[3] {
            "left" => Some(Branch::Left),
            "right" => Some(Branch::Right),
            "none" => None,
            other => return Err(self.err(format!("bad missing branch {other:?}"))),
        };
        match f[1] {
            "lt" => Ok(SplitCondition::less(f[0], self.float(f[2])?, missing)),
            "eq" => Ok(SplitCondition::equals(f[0], f[2], missing)),
            other => Err(self.err(format!("bad test {other:?}"))),
        }
    }

    fn tree(&mut self) -> Result<TreeModel, ModelIoError> {
        let f = self.expect("tree")?;
        self.arity(&f, 1)?;
        let n = self.count(f[0])?;
        let mut nodes = Vec::with_capacity(n);
        for _ in 0..n {
            let line = *self
                .lines
                .get(self.pos)
                .ok_or_else(|| ModelIoError::Truncated("tree node list ends early".into()))?;
            let node = if line.starts_with("leaf\t") {
                let f = self.expect("leaf")?;
                self.arity(&f, 1)?;
                TreeNode::Leaf { p1: self.float(f[0])? }
            } else {
                let f = self.expect("split")?;
                if f.len() < 2 {
                    return Err(self.err("split needs child indices"));
                }
                TreeNode::Split {
                    left: self.count(f[0])?,
                    right: self.count(f[1])?,
                    condition: self.condition(&f[2..])?,
                }
            };
            nodes.push(node);
        }
        TreeModel::from_nodes(nodes).map_err(|m| self.err(m))
    }

    fn adtree(&mut self) -> Result<AdTreeModel, ModelIoError> {
        let f = self.expect("adtree")?;
        self.arity(&f, 1)?;
        let n = self.count(f[0])?;
        let f = self.expect("root")?;
        self.arity(&f, 1)?;
        let root_value = self.float(f[0])?;
        // flat records, assembled bottom-up afterwards
        let mut records: Vec<(usize, usize, bool, SplitCondition, f64, f64)> = Vec::with_capacity(n);
        let mut known: HashMap<usize, usize> = HashMap::from([(0, usize::MAX)]);
        for _ in 0..n {
            let f = self.expect("splitter")?;
            self.arity(&f, 9)?;
            let index = self.count(f[0])?;
            let parent = self.count(f[1])?;
            let yes = match f[2] {
                "yes" => true,
                "no" => false,
                other => return Err(self.err(format!("bad branch {other:?}"))),
            };
            if index == 0 || known.contains_key(&index) {
                return Err(self.err(format!("invalid or duplicate splitter index {index}")));
            }
            if !known.contains_key(&parent) {
                return Err(self.err(format!("parent {parent} not yet defined")));
            }
            known.insert(index, records.len());
            records.push((index, parent, yes, self.condition(&f[3..7])?, self.float(f[7])?, self.float(f[8])?));
        }
        fn build(records: &[(usize, usize, bool, SplitCondition, f64, f64)], parent: usize, yes: bool, value: f64) -> PredictionNode {
            let splitters = records
                .iter()
                .filter(|r| r.1 == parent && (parent == 0 || r.2 == yes))
                .map(|r| Splitter {
                    index: r.0,
                    condition: r.3.clone(),
                    yes: build(records, r.0, true, r.4),
                    no: build(records, r.0, false, r.5),
                })
                .collect();
            PredictionNode { value, splitters }
        }
        Ok(AdTreeModel {
            root: build(&records, 0, true, root_value),
        })
    }

    fn bayes(&mut self) -> Result<BayesModel, ModelIoError> {
        let f = self.expect("bayes")?;
        self.arity(&f, 3)?;
        let class_counts = [self.float(f[0])?, self.float(f[1])?];
        let n = self.count(f[2])?;
        let mut features = Vec::with_capacity(n);
        for _ in 0..n {
            let line = *self
                .lines
                .get(self.pos)
                .ok_or_else(|| ModelIoError::Truncated("bayes feature list ends early".into()))?;
            if line.starts_with("gaussian\t") {
                let f = self.expect("gaussian")?;
                self.arity(&f, 5)?;
                let v: Vec<f64> = f[1..].iter().map(|s| self.float(s)).collect::<Result<_, _>>()?;
                if v[2] <= 0.0 || v[3] <= 0.0 {
                    return Err(self.err("variance must be positive"));
                }
                features.push(BayesFeature::Gaussian {
                    feature: f[0].into(),
                    mean: [v[0], v[1]],
                    var: [v[2], v[3]],
                });
            } else {
                let f = self.expect("categorical")?;
                self.arity(&f, 2)?;
                let k = self.count(f[1])?;
                let mut levels = Vec::with_capacity(k);
                let mut counts = Vec::with_capacity(k);
                for _ in 0..k {
                    let l = self.expect("level")?;
                    self.arity(&l, 3)?;
                    levels.push(l[0].to_string());
                    counts.push([self.float(l[1])?, self.float(l[2])?]);
                }
                if !levels.windows(2).all(|w| w[0] < w[1]) {
                    return Err(self.err("levels must be sorted and distinct"));
                }
                features.push(BayesFeature::Categorical {
                    feature: f[0].into(),
                    levels,
                    counts,
                });
            }
        }
        Ok(BayesModel { class_counts, features })
    }

    fn ensemble(&mut self) -> Result<EnsembleModel, ModelIoError> {
        let f = self.expect("ensemble")?;
        self.arity(&f, 2)?;
        let kind = EnsembleKind::parse(f[0]).ok_or_else(|| self.err(format!("unknown ensemble kind {:?}", f[0])))?;
        let n = self.count(f[1])?;
        if n == 0 {
            return Err(self.err("ensemble has no members"));
        }
        let mut members = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for _ in 0..n {
            let f = self.expect("member")?;
            self.arity(&f, 1)?;
            weights.push(self.float(f[0])?);
            members.push(self.tree()?);
        }
        Ok(EnsembleModel { kind, members, weights })
    }
}

pub fn from_text(text: &str) -> Result<FittedModel, ModelIoError> {
    let body = text
        .strip_suffix('\n')
        .ok_or_else(|| ModelIoError::Truncated("no final newline".into()))?;
    let mut r = Reader {
        lines: body.split('\n').collect(),
        pos: 0,
    };
    let header = r.lines[0];
    if header != HEADER {
        let found = header
            .strip_prefix("churnforge-model ")
            .map_or_else(|| header.to_string(), str::to_string);
        return Err(ModelIoError::Version {
            found,
            expected: "v1".into(),
        });
    }
    r.pos = 1;
    let f = r.expect("algorithm")?;
    r.arity(&f, 1)?;
    let algorithm: Algorithm = f[0].parse().map_err(|_| r.err(format!("unknown algorithm {:?}", f[0])))?;
    let f = r.expect("features")?;
    r.arity(&f, 1)?;
    let n = r.count(f[0])?;
    let mut features = Vec::with_capacity(n);
    for _ in 0..n {
        let f = r.expect("feature")?;
        r.arity(&f, 2)?;
        features.push(match f[0] {
            "numeric" => FeatureDef::numeric(f[1]),
            "categorical" => FeatureDef::categorical(f[1]),
            other => return Err(r.err(format!("bad feature kind {other:?}"))),
        });
    }
    let tag = r
        .lines
        .get(r.pos)
        .and_then(|l| l.split('\t').next())
        .ok_or_else(|| ModelIoError::Truncated("no model block".into()))?;
    let model = match tag {
        "tree" => Model::Tree(r.tree()?),
        "adtree" => Model::AdTree(r.adtree()?),
        "bayes" => Model::Bayes(r.bayes()?),
        "ensemble" => Model::Ensemble(r.ensemble()?),
        other => {
            r.pos += 1;
            return Err(r.err(format!("unknown model block {other:?}")));
        }
    };
    r.expect("end")?;
    if r.pos != r.lines.len() {
        r.pos += 1;
        return Err(r.err("content after \"end\""));
    }
    Ok(FittedModel {
        algorithm,
        features,
        model,
    })
}
