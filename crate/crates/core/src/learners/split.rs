//! Exhaustive single-feature split search shared by the tree learners, the
//! ADTree booster and feature ranking.
//!
//! Numeric candidates are midpoints between consecutive distinct values;
//! categorical candidates are one-level-versus-rest. Missing values join
//! whichever side carries more non-missing weight (right on a tie). Ties in
//! cost resolve to the earlier candidate in (feature name, threshold) order.

use super::data::{BoundSplit, BoundTest, Column, TrainSet, MISSING_CODE};

/// Relative tolerance under which two split costs count as tied.
pub(crate) const TIE_EPS: f64 = 1e-12;

pub(crate) fn is_better(cost: f64, best: f64) -> bool {
    cost < best - TIE_EPS * (1.0 + best.abs())
}

/// Class-1 and class-0 weight plus sample count on one side of a split.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Mass {
    pub pos: f64,
    pub neg: f64,
    pub count: usize,
}

impl Mass {
    pub fn add(&mut self, label: u8, weight: f64) {
        if label == 1 {
            self.pos += weight;
        } else {
            self.neg += weight;
        }
        self.count += 1;
    }

    pub fn total(&self) -> f64 {
        self.pos + self.neg
    }

    fn plus(self, other: Mass) -> Mass {
        Mass {
            pos: self.pos + other.pos,
            neg: self.neg + other.neg,
            count: self.count + other.count,
        }
    }

    fn minus(self, other: Mass) -> Mass {
        Mass {
            pos: self.pos - other.pos,
            neg: self.neg - other.neg,
            count: self.count - other.count,
        }
    }
}

/// Weighted Gini impurity summed over both sides (unnormalized).
pub(crate) fn gini_cost(left: &Mass, right: &Mass) -> f64 {
    let side = |m: &Mass| if m.total() > 0.0 { 2.0 * m.pos * m.neg / m.total() } else { 0.0 };
    side(left) + side(right)
}

/// Binary entropy in bits of a side, times its weight.
pub(crate) fn weighted_entropy(m: &Mass) -> f64 {
    let w = m.total();
    if w <= 0.0 {
        return 0.0;
    }
    [m.pos, m.neg].iter().filter(|&&x| x > 0.0).map(|&x| -x * (x / w).log2()).sum()
}

pub(crate) fn entropy_cost(left: &Mass, right: &Mass) -> f64 {
    weighted_entropy(left) + weighted_entropy(right)
}

#[derive(Clone, Debug)]
pub(crate) struct Candidate {
    pub split: BoundSplit,
    pub cost: f64,
    pub left: Mass,
    pub right: Mass,
}

fn route_missing(left: Mass, right: Mass, missing: Mass) -> (Mass, Mass, bool) {
    let missing_left = (left.total(), left.count) > (right.total(), right.count);
    if missing_left {
        (left.plus(missing), right, true)
    } else {
        (left, right.plus(missing), false)
    }
}

/// Scans `(value, label, weight)` entries sorted ascending by value.
pub(crate) fn scan_numeric(
    feature: usize,
    entries: &[(f64, u8, f64)],
    missing: Mass,
    min_leaf: usize,
    cost: &impl Fn(&Mass, &Mass) -> f64,
) -> Option<Candidate> {
    let mut total = Mass::default();
    for &(_, y, w) in entries {
        total.add(y, w);
    }
    let mut left = Mass::default();
    let mut best: Option<Candidate> = None;
    for i in 0..entries.len().saturating_sub(1) {
        let (v, y, w) = entries[i];
        left.add(y, w);
        let next = entries[i + 1].0;
        if next <= v {
            continue;
        }
        let mut threshold = v + (next - v) / 2.0;
        if threshold <= v {
            threshold = next;
        }
        let (l, r, missing_left) = route_missing(left, total.minus(left), missing);
        if l.count < min_leaf || r.count < min_leaf {
            continue;
        }
        let c = cost(&l, &r);
        if best.as_ref().is_none_or(|b| is_better(c, b.cost)) {
            best = Some(Candidate {
                split: BoundSplit {
                    feature,
                    test: BoundTest::Less(threshold),
                    missing_left,
                },
                cost: c,
                left: l,
                right: r,
            });
        }
    }
    best
}

/// Scans per-level masses (index = level code).
pub(crate) fn scan_categorical(
    feature: usize,
    per_level: &[Mass],
    missing: Mass,
    min_leaf: usize,
    cost: &impl Fn(&Mass, &Mass) -> f64,
) -> Option<Candidate> {
    let total = per_level.iter().fold(Mass::default(), |a, &m| a.plus(m));
    let mut best: Option<Candidate> = None;
    for (code, &level) in per_level.iter().enumerate() {
        if level.count == 0 || level.count == total.count {
            continue;
        }
        let (l, r, missing_left) = route_missing(level, total.minus(level), missing);
        if l.count < min_leaf || r.count < min_leaf {
            continue;
        }
        let c = cost(&l, &r);
        if best.as_ref().is_none_or(|b| is_better(c, b.cost)) {
            best = Some(Candidate {
                split: BoundSplit {
                    feature,
                    test: BoundTest::Equals(code as u32),
                    missing_left,
                },
                cost: c,
                left: l,
                right: r,
            });
        }
    }
    best
}

/// Best split of one feature over `samples` (repeats allowed).
pub(crate) fn best_for_feature(
    data: &TrainSet,
    feature: usize,
    samples: &[usize],
    weights: &[f64],
    min_leaf: usize,
    cost: &impl Fn(&Mass, &Mass) -> f64,
) -> Option<Candidate> {
    let labels = &data.labels;
    let mut missing = Mass::default();
    match &data.columns[feature] {
        Column::Numeric(values) => {
            let mut entries: Vec<(f64, u8, f64)> = Vec::with_capacity(samples.len());
            for &i in samples {
                let x = values[i];
                if x.is_nan() {
                    missing.add(labels[i], weights[i]);
                } else {
                    entries.push((x, labels[i], weights[i]));
                }
            }
            entries.sort_by(|a, b| a.0.total_cmp(&b.0));
            scan_numeric(feature, &entries, missing, min_leaf, cost)
        }
        Column::Categorical { codes, levels } => {
            let mut per_level = vec![Mass::default(); levels.len()];
            for &i in samples {
                match codes[i] {
                    MISSING_CODE => missing.add(labels[i], weights[i]),
                    c => per_level[c as usize].add(labels[i], weights[i]),
                }
            }
            scan_categorical(feature, &per_level, missing, min_leaf, cost)
        }
    }
}

/// Best split over `features`, which must be listed in tie-break order.
pub(crate) fn best_split(
    data: &TrainSet,
    features: &[usize],
    samples: &[usize],
    weights: &[f64],
    min_leaf: usize,
    cost: &impl Fn(&Mass, &Mass) -> f64,
) -> Option<Candidate> {
    let mut best: Option<Candidate> = None;
    for &f in features {
        if let Some(c) = best_for_feature(data, f, samples, weights, min_leaf, cost) {
            if best.as_ref().is_none_or(|b| is_better(c.cost, b.cost)) {
                best = Some(c);
            }
        }
    }
    best
}
