use crate::calendar::{months, ym, MonthRange};
use crate::error::FeatureError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Task {
    Churn,
    Winback,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Train,
    Test,
}

/// Feature and label periods for one extraction.
///
/// Churn windows are calendar-fixed: three consecutive feature months
/// followed by the label months. Win-back windows are per subscriber: each
/// churner's features come from the three months before its termination
/// month, for terminations inside `termination_range`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowSpec {
    Churn {
        feature_months: MonthRange,
        label_months: MonthRange,
    },
    Winback {
        termination_range: MonthRange,
        label_months: MonthRange,
    },
}

impl WindowSpec {
    pub fn churn(feature_months: MonthRange, label_months: MonthRange) -> Result<Self, FeatureError> {
        if feature_months.len() != 3 {
            return Err(FeatureError::Malformed(format!(
                "churn feature window must span 3 months, got {feature_months}"
            )));
        }
        if feature_months.end() >= label_months.start() {
            return Err(FeatureError::Malformed(format!(
                "feature months {feature_months} must precede label months {label_months}"
            )));
        }
        Ok(WindowSpec::Churn {
            feature_months,
            label_months,
        })
    }

    pub fn winback(termination_range: MonthRange, label_months: MonthRange) -> Result<Self, FeatureError> {
        // the latest feature month is the month before the last termination month
        if termination_range.end().add_months(-1) >= label_months.start() {
            return Err(FeatureError::Malformed(format!(
                "terminations {termination_range} would put feature months inside label months {label_months}"
            )));
        }
        Ok(WindowSpec::Winback {
            termination_range,
            label_months,
        })
    }

    pub fn task(&self) -> Task {
        match self {
            WindowSpec::Churn { .. } => Task::Churn,
            WindowSpec::Winback { .. } => Task::Winback,
        }
    }

    pub fn label_months(&self) -> MonthRange {
        match *self {
            WindowSpec::Churn { label_months, .. } | WindowSpec::Winback { label_months, .. } => label_months,
        }
    }
}

/// The canonical 2011 windows: churn trains on Aug–Oct features with
/// Nov–Jan labels and is applied to Oct–Dec features predicting Jan–Mar;
/// win-back trains on Apr–Oct terminations and is applied to Jun–Dec
/// terminations.
pub fn standard_windows(task: Task, role: Role) -> WindowSpec {
    let train_labels = months(ym(2011, 11), ym(2012, 1));
    let test_labels = months(ym(2012, 1), ym(2012, 3));
    let spec = match (task, role) {
        (Task::Churn, Role::Train) => WindowSpec::churn(months(ym(2011, 8), ym(2011, 10)), train_labels),
        (Task::Churn, Role::Test) => WindowSpec::churn(months(ym(2011, 10), ym(2011, 12)), test_labels),
        (Task::Winback, Role::Train) => WindowSpec::winback(months(ym(2011, 4), ym(2011, 10)), train_labels),
        (Task::Winback, Role::Test) => WindowSpec::winback(months(ym(2011, 6), ym(2011, 12)), test_labels),
    };
    spec.expect("standard windows are well-formed")
}
