use std::fmt;

use crate::features::Value;

/// Which side of a split a row takes. `Left` is the side where the
/// condition holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Test {
    /// `value < threshold`
    Less(f64),
    /// `value == category`
    Equals(String),
}

/// A single-feature test. Missing values follow `missing_goes`; when it is
/// `None` the condition has no answer for a missing value, which an
/// alternating decision tree treats as "this splitter does not apply".
#[derive(Clone, Debug, PartialEq)]
pub struct SplitCondition {
    pub feature: String,
    pub test: Test,
    pub missing_goes: Option<Branch>,
}

impl SplitCondition {
    pub fn less(feature: impl Into<String>, threshold: f64, missing_goes: Option<Branch>) -> Self {
        Self {
            feature: feature.into(),
            test: Test::Less(threshold),
            missing_goes,
        }
    }

    pub fn equals(feature: impl Into<String>, category: impl Into<String>, missing_goes: Option<Branch>) -> Self {
        Self {
            feature: feature.into(),
            test: Test::Equals(category.into()),
            missing_goes,
        }
    }

    /// `Some(true)` when the row goes left.
    pub fn evaluate(&self, value: &Value) -> Option<bool> {
        match (&self.test, value) {
            (Test::Less(t), Value::Num(v)) => Some(v < t),
            (Test::Equals(c), Value::Cat(v)) => Some(v == c),
            _ => self.missing_goes.map(|b| b == Branch::Left),
        }
    }
}

impl fmt::Display for SplitCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.test {
            Test::Less(t) => write!(f, "{} < {t}", self.feature),
            Test::Equals(c) => write!(f, "{} = {c}", self.feature),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluate_routes_missing() {
        let c = SplitCondition::less("UL1110", 0.5, Some(Branch::Right));
        assert_eq!(c.evaluate(&Value::Num(0.0)), Some(true));
        assert_eq!(c.evaluate(&Value::Num(0.5)), Some(false));
        assert_eq!(c.evaluate(&Value::Missing), Some(false));
        let c = SplitCondition::equals("T_Location", "AJP", None);
        assert_eq!(c.evaluate(&Value::Cat("AJP".into())), Some(true));
        assert_eq!(c.evaluate(&Value::Cat("TLS".into())), Some(false));
        assert_eq!(c.evaluate(&Value::Missing), None);
    }
}
