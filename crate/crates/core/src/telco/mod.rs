//! Relational telco schema: subscribers, monthly billing, monthly usage and
//! service requests. Subscriber, billing and usage rows join on billing id;
//! service requests join on customer id.

mod csv_io;
mod generate;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;

use crate::calendar::{MonthRange, YearMonth};
use crate::error::{DataError, ParseError};

pub use csv_io::{read_tables, write_tables, BILLING_FILE, REQUESTS_FILE, SUBSCRIBERS_FILE, USAGE_FILE};
pub use generate::{generate, GeneratorConfig};

/// Currency amount in integer cents. Renders as a fixed two-decimal number.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cents(pub i64);

impl Cents {
    pub fn as_units(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl fmt::Display for Cents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

impl FromStr for Cents {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseError(format!("invalid currency amount {s:?}"));
        let (negative, digits) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
        if whole.is_empty() || frac.len() > 2 || !whole.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let whole: i64 = whole.parse().map_err(|_| bad())?;
        let frac: i64 = match frac.len() {
            0 => 0,
            1 => frac.parse::<i64>().map_err(|_| bad())? * 10,
            _ => frac.parse().map_err(|_| bad())?,
        };
        let cents = whole.checked_mul(100).and_then(|w| w.checked_add(frac)).ok_or_else(bad)?;
        Ok(Cents(if negative { -cents } else { cents }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Segment {
    Consumer,
    Sme,
}

impl Segment {
    pub fn as_str(self) -> &'static str {
        match self {
            Segment::Consumer => "consumer",
            Segment::Sme => "sme",
        }
    }
}

impl FromStr for Segment {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "consumer" => Ok(Segment::Consumer),
            "sme" => Ok(Segment::Sme),
            _ => Err(ParseError(format!("unknown segment {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ServiceType {
    Voice,
    VoiceBroadband,
}

impl ServiceType {
    pub fn as_str(self) -> &'static str {
        match self {
            ServiceType::Voice => "voice",
            ServiceType::VoiceBroadband => "voice_broadband",
        }
    }
}

impl FromStr for ServiceType {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "voice" => Ok(ServiceType::Voice),
            "voice_broadband" => Ok(ServiceType::VoiceBroadband),
            _ => Err(ParseError(format!("unknown service type {s:?}"))),
        }
    }
}

/// One service of one billing account of one customer.
#[derive(Clone, Debug, PartialEq)]
pub struct SubscriberRecord {
    pub customer_id: String,
    pub billing_id: String,
    pub service_id: String,
    pub segment: Segment,
    pub service_type: ServiceType,
    pub activation_date: NaiveDate,
    pub customer_since: NaiveDate,
    pub contract_period: u32,
    pub price_start: Cents,
    pub t_location: String,
    pub hsbb_area: bool,
    pub termination_date: Option<NaiveDate>,
    pub comeback_date: Option<NaiveDate>,
}

impl SubscriberRecord {
    pub fn termination_month(&self) -> Option<YearMonth> {
        self.termination_date.map(YearMonth::of)
    }

    pub fn comeback_month(&self) -> Option<YearMonth> {
        self.comeback_date.map(YearMonth::of)
    }

    /// Still subscribed after `month` ends.
    pub fn active_after(&self, month: YearMonth) -> bool {
        YearMonth::of(self.activation_date) <= month && self.termination_month().is_none_or(|t| t > month)
    }

    fn check(&self) -> Result<(), String> {
        if self.customer_since > self.activation_date {
            return Err(format!(
                "customer_since {} is after activation_date {}",
                self.customer_since, self.activation_date
            ));
        }
        if let Some(t) = self.termination_date {
            if t < self.activation_date {
                return Err(format!("termination_date {t} precedes activation_date {}", self.activation_date));
            }
        }
        match (self.termination_date, self.comeback_date) {
            (None, Some(_)) => Err("comeback_date without termination_date".into()),
            (Some(t), Some(c)) if c <= t => Err(format!("comeback_date {c} is not after termination_date {t}")),
            _ => Ok(()),
        }
    }

    fn key(&self) -> (&str, &str, &str) {
        (&self.customer_id, &self.billing_id, &self.service_id)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BillingMonthRecord {
    pub billing_id: String,
    pub month: YearMonth,
    pub current_bill_amt: Cents,
    pub last_bill_amt: Cents,
    pub amt_2pay: Cents,
    pub outstanding: Cents,
    pub payment: Cents,
    pub credit_adj: Cents,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UsageMonthRecord {
    pub billing_id: String,
    pub month: YearMonth,
    pub download_mb: f64,
    pub upload_mb: f64,
    pub voice_minutes: f64,
    pub voice_calls: u32,
}

impl UsageMonthRecord {
    fn check(&self) -> Result<(), String> {
        for (name, v) in [
            ("download_mb", self.download_mb),
            ("upload_mb", self.upload_mb),
            ("voice_minutes", self.voice_minutes),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ServiceRequestRecord {
    pub customer_id: String,
    pub request_date: NaiveDate,
    pub request_code: String,
}

/// All four tables. Rows are kept in primary-key order by [`TelcoDataset::sort`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TelcoDataset {
    pub subscribers: Vec<SubscriberRecord>,
    pub billing: Vec<BillingMonthRecord>,
    pub usage: Vec<UsageMonthRecord>,
    pub service_requests: Vec<ServiceRequestRecord>,
}

impl TelcoDataset {
    /// Months spanned by the billing and usage tables.
    pub fn coverage(&self) -> Option<MonthRange> {
        let months = self.billing.iter().map(|b| b.month).chain(self.usage.iter().map(|u| u.month));
        let (lo, hi) = months.fold((None, None), |(lo, hi): (Option<YearMonth>, Option<YearMonth>), m| {
            (Some(lo.map_or(m, |l| l.min(m))), Some(hi.map_or(m, |h| h.max(m))))
        });
        MonthRange::new(lo?, hi?)
    }

    /// Puts every table into canonical primary-key order.
    pub fn sort(&mut self) {
        self.subscribers
            .sort_by(|a, b| (&a.customer_id, &a.billing_id, &a.service_id).cmp(&(&b.customer_id, &b.billing_id, &b.service_id)));
        self.billing.sort_by(|a, b| (&a.billing_id, a.month).cmp(&(&b.billing_id, b.month)));
        self.usage.sort_by(|a, b| (&a.billing_id, a.month).cmp(&(&b.billing_id, b.month)));
        self.service_requests
            .sort_by(|a, b| (&a.customer_id, a.request_date, &a.request_code).cmp(&(&b.customer_id, b.request_date, &b.request_code)));
    }

    /// Checks every record invariant plus referential integrity.
    pub fn validate(&self) -> Result<(), DataError> {
        let invalid = DataError::Invalid;
        let mut keys = HashSet::new();
        let mut billing_ids = HashSet::new();
        let mut customer_ids = HashSet::new();
        for s in &self.subscribers {
            s.check()
                .map_err(|e| invalid(format!("subscriber {}/{}: {e}", s.billing_id, s.service_id)))?;
            if !keys.insert(s.key()) {
                return Err(invalid(format!("duplicate subscriber key {:?}", s.key())));
            }
            billing_ids.insert(s.billing_id.as_str());
            customer_ids.insert(s.customer_id.as_str());
        }
        let mut seen = HashSet::new();
        for b in &self.billing {
            if !billing_ids.contains(b.billing_id.as_str()) {
                return Err(invalid(format!("billing row references unknown billing_id {}", b.billing_id)));
            }
            if !seen.insert((b.billing_id.as_str(), b.month)) {
                return Err(invalid(format!("duplicate billing row ({}, {})", b.billing_id, b.month)));
            }
        }
        seen.clear();
        for u in &self.usage {
            u.check()
                .map_err(|e| invalid(format!("usage ({}, {}): {e}", u.billing_id, u.month)))?;
            if !billing_ids.contains(u.billing_id.as_str()) {
                return Err(invalid(format!("usage row references unknown billing_id {}", u.billing_id)));
            }
            if !seen.insert((u.billing_id.as_str(), u.month)) {
                return Err(invalid(format!("duplicate usage row ({}, {})", u.billing_id, u.month)));
            }
        }
        let coverage = self.coverage();
        for r in &self.service_requests {
            if !customer_ids.contains(r.customer_id.as_str()) {
                return Err(invalid(format!("service request references unknown customer_id {}", r.customer_id)));
            }
            if let Some(c) = coverage {
                if !c.contains(YearMonth::of(r.request_date)) {
                    return Err(invalid(format!(
                        "service request date {} outside covered months {c}",
                        r.request_date
                    )));
                }
            }
        }
        Ok(())
    }

    /// Subscribers grouped by billing id, in billing-id order.
    pub fn services_by_billing(&self) -> Vec<(&str, Vec<&SubscriberRecord>)> {
        let mut groups: HashMap<&str, Vec<&SubscriberRecord>> = HashMap::new();
        for s in &self.subscribers {
            groups.entry(s.billing_id.as_str()).or_default().push(s);
        }
        let mut out: Vec<_> = groups.into_iter().collect();
        for (_, services) in &mut out {
            services.sort_by(|a, b| a.service_id.cmp(&b.service_id));
        }
        out.sort_by(|a, b| a.0.cmp(b.0));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cents_render_and_parse() {
        assert_eq!(Cents(1234).to_string(), "12.34");
        assert_eq!(Cents(-5).to_string(), "-0.05");
        assert_eq!(Cents(0).to_string(), "0.00");
        assert_eq!("12.3".parse::<Cents>().unwrap(), Cents(1230));
        assert_eq!("-0.05".parse::<Cents>().unwrap(), Cents(-5));
        assert_eq!("7".parse::<Cents>().unwrap(), Cents(700));
        assert!("1.234".parse::<Cents>().is_err());
        assert!("abc".parse::<Cents>().is_err());
        assert!("-".parse::<Cents>().is_err());
    }

    proptest! {
        #[test]
        fn cents_round_trip(v in -10_000_000_000i64..10_000_000_000) {
            prop_assert_eq!(Cents(v).to_string().parse::<Cents>().unwrap(), Cents(v));
        }
    }
}
