use std::collections::HashMap;

use rayon::prelude::*;

use super::{FeatureDef, FeatureMatrix, Row, Value, WindowSpec};
use crate::calendar::{MonthRange, YearMonth};
use crate::error::FeatureError;
use crate::telco::{BillingMonthRecord, Segment, ServiceType, SubscriberRecord, TelcoDataset, UsageMonthRecord};

/// Restricts extraction to one segment and/or service type.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Population {
    pub segment: Option<Segment>,
    pub service_type: Option<ServiceType>,
}

impl Population {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn matches(&self, s: &SubscriberRecord) -> bool {
        self.segment.is_none_or(|g| g == s.segment) && self.service_type.is_none_or(|t| t == s.service_type)
    }
}

const MONTHLY: [&str; 4] = ["DL", "UL", "VOICE_MIN", "SR_COUNT"];

/// Column layout shared by every extraction. `tags` name the three window
/// months oldest first, e.g. `["1108", "1109", "1110"]`.
pub fn feature_schema(tags: &[String; 3]) -> Vec<FeatureDef> {
    let mut f: Vec<FeatureDef> = MONTHLY
        .iter()
        .flat_map(|prefix| tags.iter().map(move |t| FeatureDef::numeric(format!("{prefix}{t}"))))
        .collect();
    for name in [
        "3M_DL_avg",
        "3M_UL_avg",
        "AMT_2PAY_avg",
        "OUTSTANDING_avg",
        "PAYMENT_avg",
        "LAST_BILL_AMT_avg",
        "CURRENT_BILL_AMT_avg",
        "CREDIT_ADJ_avg",
        "DIFF_AMT_2PAY_PRICE_START",
        "DIFF_CURRENT_LAST_BILL_AMT_avg",
        "ACTIVATION_DATE_TENURE",
        "CUSTOMER_TENURE_DIFF",
        "Contract_Period",
        "HSBB_Area",
    ] {
        f.push(FeatureDef::numeric(name));
    }
    f.push(FeatureDef::categorical("T_Location"));
    f.push(FeatureDef::numeric("Price_Start"));
    f
}

fn calendar_tags(window: MonthRange) -> [String; 3] {
    let m: Vec<String> = window.months().map(YearMonth::stamp).collect();
    [m[0].clone(), m[1].clone(), m[2].clone()]
}

fn relative_tags() -> [String; 3] {
    ["_TM3".into(), "_TM2".into(), "_TM1".into()]
}

/// Three-month aggregates in currency units. Monetary means are missing
/// unless all three billing months are present.
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregates {
    pub dl_avg: f64,
    pub ul_avg: f64,
    pub amt_2pay_avg: Option<f64>,
    pub outstanding_avg: Option<f64>,
    pub payment_avg: Option<f64>,
    pub last_bill_amt_avg: Option<f64>,
    pub current_bill_amt_avg: Option<f64>,
    pub credit_adj_avg: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubscriberAttrs {
    pub price_start: f64,
    pub activation: YearMonth,
    pub customer_since: YearMonth,
    pub contract_period: u32,
    pub hsbb_area: bool,
    pub t_location: String,
}

impl SubscriberAttrs {
    fn of(s: &SubscriberRecord) -> Self {
        Self {
            price_start: s.price_start.as_units(),
            activation: YearMonth::of(s.activation_date),
            customer_since: YearMonth::of(s.customer_since),
            contract_period: s.contract_period,
            hsbb_area: s.hsbb_area,
            t_location: s.t_location.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Derived {
    pub diff_amt_2pay_price_start: Option<f64>,
    pub diff_current_last_bill_amt_avg: Option<f64>,
    pub activation_date_tenure: i64,
    pub customer_tenure_diff: i64,
}

/// Difference and tenure features. A missing operand makes the difference
/// missing; tenures are whole months with day-of-month ignored.
pub fn derive(agg: &Aggregates, attrs: &SubscriberAttrs, last_feature_month: YearMonth) -> Derived {
    Derived {
        diff_amt_2pay_price_start: agg.amt_2pay_avg.map(|a| a - attrs.price_start),
        diff_current_last_bill_amt_avg: agg.current_bill_amt_avg.zip(agg.last_bill_amt_avg).map(|(c, l)| c - l),
        activation_date_tenure: last_feature_month.months_since(attrs.activation),
        customer_tenure_diff: attrs.activation.months_since(attrs.customer_since),
    }
}

struct Tables<'a> {
    usage: HashMap<(&'a str, YearMonth), &'a UsageMonthRecord>,
    billing: HashMap<(&'a str, YearMonth), &'a BillingMonthRecord>,
    requests: HashMap<(&'a str, YearMonth), u32>,
}

impl<'a> Tables<'a> {
    fn index(d: &'a TelcoDataset) -> Self {
        let mut requests = HashMap::new();
        for r in &d.service_requests {
            *requests.entry((r.customer_id.as_str(), YearMonth::of(r.request_date))).or_insert(0) += 1;
        }
        Self {
            usage: d.usage.iter().map(|u| ((u.billing_id.as_str(), u.month), u)).collect(),
            billing: d.billing.iter().map(|b| ((b.billing_id.as_str(), b.month), b)).collect(),
            requests,
        }
    }

    fn features(&self, billing_id: &str, subscriber: &SubscriberRecord, window: MonthRange) -> Vec<Value> {
        let months: Vec<YearMonth> = window.months().collect();
        let usage: Vec<Option<&UsageMonthRecord>> = months.iter().map(|m| self.usage.get(&(billing_id, *m)).copied()).collect();
        let bills: Vec<Option<&BillingMonthRecord>> = months.iter().map(|m| self.billing.get(&(billing_id, *m)).copied()).collect();

        let dl: Vec<f64> = usage.iter().map(|u| u.map_or(0.0, |u| u.download_mb)).collect();
        let ul: Vec<f64> = usage.iter().map(|u| u.map_or(0.0, |u| u.upload_mb)).collect();
        let voice: Vec<f64> = usage.iter().map(|u| u.map_or(0.0, |u| u.voice_minutes)).collect();
        let sr: Vec<f64> = months
            .iter()
            .map(|m| self.requests.get(&(subscriber.customer_id.as_str(), *m)).copied().unwrap_or(0) as f64)
            .collect();

        let money_avg = |field: fn(&BillingMonthRecord) -> i64| -> Option<f64> {
            let cents: Option<Vec<i64>> = bills.iter().map(|b| b.map(field)).collect();
            cents.map(|c| c.iter().sum::<i64>() as f64 / (100.0 * c.len() as f64))
        };
        let agg = Aggregates {
            dl_avg: mean3(&dl),
            ul_avg: mean3(&ul),
            amt_2pay_avg: money_avg(|b| b.amt_2pay.0),
            outstanding_avg: money_avg(|b| b.outstanding.0),
            payment_avg: money_avg(|b| b.payment.0),
            last_bill_amt_avg: money_avg(|b| b.last_bill_amt.0),
            current_bill_amt_avg: money_avg(|b| b.current_bill_amt.0),
            credit_adj_avg: money_avg(|b| b.credit_adj.0),
        };
        let attrs = SubscriberAttrs::of(subscriber);
        let derived = derive(&agg, &attrs, window.end());

        let mut v: Vec<Value> = [dl, ul, voice, sr].into_iter().flatten().map(Value::Num).collect();
        v.extend([
            Value::Num(agg.dl_avg),
            Value::Num(agg.ul_avg),
            agg.amt_2pay_avg.into(),
            agg.outstanding_avg.into(),
            agg.payment_avg.into(),
            agg.last_bill_amt_avg.into(),
            agg.current_bill_amt_avg.into(),
            agg.credit_adj_avg.into(),
            derived.diff_amt_2pay_price_start.into(),
            derived.diff_current_last_bill_amt_avg.into(),
            Value::Num(derived.activation_date_tenure as f64),
            Value::Num(derived.customer_tenure_diff as f64),
            Value::Num(attrs.contract_period as f64),
            Value::Num(if attrs.hsbb_area { 1.0 } else { 0.0 }),
            Value::Cat(attrs.t_location),
            Value::Num(attrs.price_start),
        ]);
        v
    }
}

fn mean3(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn require_coverage(dataset: &TelcoDataset, needed: MonthRange) -> Result<(), FeatureError> {
    match dataset.coverage() {
        Some(c) if c.contains_range(needed) => Ok(()),
        covered => Err(FeatureError::OutsideCoverage {
            needed: needed.to_string(),
            covered: covered.map_or_else(|| "nothing".to_string(), |c| c.to_string()),
        }),
    }
}

/// One row per billing account with a service (in `population`) still
/// active after the last feature month. Label 1 iff any such service
/// terminates within the label months.
pub fn extract_churn(dataset: &TelcoDataset, window: &WindowSpec, population: Population) -> Result<FeatureMatrix, FeatureError> {
    let WindowSpec::Churn {
        feature_months,
        label_months,
    } = *window
    else {
        return Err(FeatureError::WrongTask("extract_churn needs a churn window".into()));
    };
    require_coverage(dataset, feature_months)?;
    let tables = Tables::index(dataset);
    let last = feature_months.end();

    let groups = dataset.services_by_billing();
    let rows: Vec<Row> = groups
        .par_iter()
        .filter_map(|(billing_id, services)| {
            let active: Vec<&SubscriberRecord> = services
                .iter()
                .copied()
                .filter(|s| population.matches(s) && s.active_after(last))
                .collect();
            let first = *active.first()?;
            let churns = active
                .iter()
                .any(|s| s.termination_month().is_some_and(|t| label_months.contains(t)));
            Some(Row {
                billing_id: billing_id.to_string(),
                values: tables.features(billing_id, first, feature_months),
                label: Some(u8::from(churns)),
            })
        })
        .collect();
    FeatureMatrix::from_rows(feature_schema(&calendar_tags(feature_months)), rows)
}

/// One row per billing account with a service (in `population`) that
/// terminated inside the termination range, using the earliest such
/// termination. Features come from the three months before that
/// termination month; label 1 iff the service came back within the label
/// months.
pub fn extract_winback(dataset: &TelcoDataset, window: &WindowSpec, population: Population) -> Result<FeatureMatrix, FeatureError> {
    let WindowSpec::Winback {
        termination_range,
        label_months,
    } = *window
    else {
        return Err(FeatureError::WrongTask("extract_winback needs a win-back window".into()));
    };
    let schema = feature_schema(&relative_tags());
    let churners: Vec<(&str, &SubscriberRecord)> = dataset
        .services_by_billing()
        .into_iter()
        .filter_map(|(billing_id, services)| {
            let churned = services
                .into_iter()
                .filter(|s| population.matches(s) && s.termination_month().is_some_and(|t| termination_range.contains(t)))
                .min_by(|a, b| (a.termination_date, &a.service_id).cmp(&(b.termination_date, &b.service_id)))?;
            Some((billing_id, churned))
        })
        .collect();
    if churners.is_empty() {
        return Ok(FeatureMatrix::new(schema));
    }
    let needed =
        MonthRange::new(termination_range.start().add_months(-3), termination_range.end().add_months(-1)).expect("non-empty range");
    require_coverage(dataset, needed)?;
    let tables = Tables::index(dataset);

    let rows: Vec<Row> = churners
        .par_iter()
        .map(|(billing_id, s)| {
            let t = s.termination_month().expect("churner has a termination");
            let window = MonthRange::new(t.add_months(-3), t.add_months(-1)).expect("three months");
            let back = s.comeback_month().is_some_and(|c| label_months.contains(c));
            Row {
                billing_id: billing_id.to_string(),
                values: tables.features(billing_id, s, window),
                label: Some(u8::from(back)),
            }
        })
        .collect();
    FeatureMatrix::from_rows(schema, rows)
}
