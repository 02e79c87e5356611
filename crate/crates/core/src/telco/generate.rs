//! Seeded synthetic telco dataset with a planted churn signal.
//!
//! Every subscriber draws from its own ChaCha stream keyed by
//! `(seed, subscriber index)`, so output does not depend on thread count.
//! The planted signal: in the six months before termination, a churner's
//! download and upload volumes are scaled by `1 - s * (7 - k) / 6`
//! (k = months until the termination month, s = `signal_strength`), voice
//! usage by half that decline, and service requests become more frequent.
//! Win-back propensity leans toward subscribers in HSBB areas.

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Poisson};
use rayon::prelude::*;

use super::{BillingMonthRecord, Cents, Segment, ServiceRequestRecord, ServiceType, SubscriberRecord, TelcoDataset, UsageMonthRecord};
use crate::calendar::{months, ym, MonthRange, YearMonth};
use crate::error::DataError;

pub const T_LOCATIONS: &[&str] = &["AJP", "BDK", "CWT", "JRG", "KTP", "PGL", "SRG", "TLS", "TPN", "WDL"];
const REQUEST_CODES: &[&str] = &["BILLING", "COMPLAINT", "FAULT", "PLAN_CHANGE", "RELOCATION"];
const DECLINE_MONTHS: i64 = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n_consumers: usize,
    pub n_smes: usize,
    /// Fraction of each segment terminating inside `label_months`; also the
    /// per-window hazard applied to every other month.
    pub churn_rate: f64,
    pub winback_rate: f64,
    pub months_covered: MonthRange,
    pub label_months: MonthRange,
    pub signal_strength: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_consumers: 15_000,
            n_smes: 1_000,
            churn_rate: 0.08,
            winback_rate: 0.2,
            months_covered: months(ym(2011, 1), ym(2011, 12)),
            label_months: months(ym(2011, 11), ym(2012, 1)),
            signal_strength: 0.8,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), DataError> {
        let bad = |m: String| Err(DataError::InvalidConfig(m));
        if !(self.churn_rate > 0.0 && self.churn_rate < 1.0) {
            return bad(format!("churn_rate must be in (0,1), got {}", self.churn_rate));
        }
        if !(self.winback_rate > 0.0 && self.winback_rate < 1.0) {
            return bad(format!("winback_rate must be in (0,1), got {}", self.winback_rate));
        }
        if !(0.0..=1.0).contains(&self.signal_strength) {
            return bad(format!("signal_strength must be in [0,1], got {}", self.signal_strength));
        }
        if self.label_months.start() <= self.months_covered.start() {
            return bad(format!(
                "label months {} must start after the first covered month {}",
                self.label_months,
                self.months_covered.start()
            ));
        }
        Ok(())
    }

    /// Last month in which a termination or comeback can occur.
    pub fn horizon_end(&self) -> YearMonth {
        self.label_months.end().max(self.months_covered.end()).add_months(2)
    }

    fn monthly_hazard(&self) -> f64 {
        self.churn_rate / self.label_months.len() as f64
    }

    fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

struct Draft {
    joins_previous: bool,
    record: SubscriberRecord,
    candidate_since: NaiveDate,
    billing: Vec<BillingMonthRecord>,
    usage: Vec<UsageMonthRecord>,
    requests: Vec<(NaiveDate, String)>,
}

/// Generates a dataset that satisfies every schema invariant. Pure in `config`.
pub fn generate(config: &GeneratorConfig) -> Result<TelcoDataset, DataError> {
    config.validate()?;
    let total = config.n_consumers + config.n_smes;

    // which subscribers terminate inside the label window: exact count per segment
    let mut in_label_window = vec![false; total];
    for (segment_idx, range) in [(0u64, 0..config.n_consumers), (1, config.n_consumers..total)] {
        let n = range.len();
        let k = (config.churn_rate * n as f64).round() as usize;
        let mut idx: Vec<usize> = range.collect();
        idx.shuffle(&mut config.stream(u64::MAX - segment_idx));
        for &i in &idx[..k.min(n)] {
            in_label_window[i] = true;
        }
    }

    let drafts: Vec<Draft> = (0..total)
        .into_par_iter()
        .map(|i| {
            let segment = if i < config.n_consumers { Segment::Consumer } else { Segment::Sme };
            draft_subscriber(config, i, segment, in_label_window[i])
        })
        .collect();

    let mut dataset = TelcoDataset::default();
    let mut customer = 0usize;
    let mut group_start = 0usize;
    let mut customer_of = Vec::with_capacity(total);
    for (i, d) in drafts.iter().enumerate() {
        let same_segment = i > 0 && d.record.segment == drafts[i - 1].record.segment;
        let group_len = i - group_start;
        if !(d.joins_previous && same_segment && group_len < 3) || i == 0 {
            customer += 1;
            group_start = i;
        }
        customer_of.push((customer, group_start));
    }
    // customer_since: the earliest candidate across the customer's accounts
    let mut since = vec![None::<NaiveDate>; total];
    for (i, d) in drafts.iter().enumerate() {
        let start = customer_of[i].1;
        since[start] = Some(since[start].map_or(d.candidate_since, |s: NaiveDate| s.min(d.candidate_since)));
    }

    for (i, d) in drafts.into_iter().enumerate() {
        let (cust, start) = customer_of[i];
        let customer_id = format!("C{cust:07}");
        let mut record = d.record;
        record.customer_id = customer_id.clone();
        record.customer_since = since[start].expect("group start visited");
        dataset.subscribers.push(record);
        dataset.billing.extend(d.billing);
        dataset.usage.extend(d.usage);
        dataset
            .service_requests
            .extend(d.requests.into_iter().map(|(request_date, request_code)| ServiceRequestRecord {
                customer_id: customer_id.clone(),
                request_date,
                request_code,
            }));
    }
    dataset.sort();
    Ok(dataset)
}

fn day_in(rng: &mut impl Rng, month: YearMonth) -> NaiveDate {
    let day = rng.random_range(1..=month.days_in_month());
    NaiveDate::from_ymd_opt(month.year(), month.month(), day).expect("valid day")
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn draft_subscriber(config: &GeneratorConfig, index: usize, segment: Segment, label_churner: bool) -> Draft {
    let mut rng = config.stream(index as u64);
    let covered = config.months_covered;
    let s = config.signal_strength;

    let joins_previous = rng.random_bool(match segment {
        Segment::Consumer => 0.1,
        Segment::Sme => 0.4,
    });
    let service_type = match segment {
        Segment::Consumer if rng.random_bool(0.9) => ServiceType::VoiceBroadband,
        Segment::Sme if rng.random_bool(0.5) => ServiceType::VoiceBroadband,
        _ => ServiceType::Voice,
    };
    let activation_month = covered.start().add_months(-rng.random_range(1..=72));
    let activation_date = day_in(&mut rng, activation_month);
    let since_month = activation_month.add_months(-rng.random_range(0..=36));
    let candidate_since = day_in(&mut rng, since_month);
    let candidate_since = candidate_since.min(activation_date);
    let contract_period = match segment {
        Segment::Consumer => [0, 12, 24][rng.random_range(0..3)],
        Segment::Sme => [0, 12, 24, 36][rng.random_range(0..4)],
    };
    let base_price: i64 = match (segment, service_type) {
        (Segment::Consumer, ServiceType::Voice) => rng.random_range(3000..6000),
        (Segment::Consumer, ServiceType::VoiceBroadband) => rng.random_range(5000..12000),
        (Segment::Sme, ServiceType::Voice) => rng.random_range(6000..15000),
        (Segment::Sme, ServiceType::VoiceBroadband) => rng.random_range(10000..30000),
    };
    let price_start = Cents(base_price / 50 * 50);
    let t_location = T_LOCATIONS[rng.random_range(0..T_LOCATIONS.len())].to_string();
    let hsbb_area = rng.random_bool(0.6);

    // termination: label-window churners are fixed upstream; everyone else
    // faces a monthly hazard outside the label window
    let horizon = months(covered.start().add_months(1), config.horizon_end());
    let termination_month = if label_churner {
        Some(
            config
                .label_months
                .start()
                .add_months(rng.random_range(0..config.label_months.len() as i64)),
        )
    } else {
        let hazard = config.monthly_hazard();
        let mut found = None;
        for m in horizon.months().filter(|m| !config.label_months.contains(*m)) {
            if rng.random_bool(hazard) {
                found = Some(m);
                break;
            }
        }
        found
    };
    let termination_date = termination_month.map(|m| day_in(&mut rng, m));
    let comeback_date = termination_month.and_then(|t| {
        let lean = if hsbb_area { 1.0 } else { -1.0 };
        let p = (config.winback_rate * (1.0 + 0.8 * s * lean)).clamp(0.0, 1.0);
        let returns = rng.random_bool(p);
        let delay = rng.random_range(1..=9);
        let day_seed = rng.random::<u32>();
        let m = t.add_months(delay);
        (returns && m <= config.horizon_end()).then(|| {
            let day = day_seed % m.days_in_month() + 1;
            NaiveDate::from_ymd_opt(m.year(), m.month(), day).expect("valid day")
        })
    });

    let billing_id = format!("B{:07}", index + 1);
    let service_id = format!("S{:07}", index + 1);

    let broadband = service_type == ServiceType::VoiceBroadband;
    let dl_base = LogNormal::new(3000f64.ln(), 0.35).unwrap().sample(&mut rng);
    let ul_ratio = rng.random_range(0.08..0.2);
    let voice_base = LogNormal::new(200f64.ln(), 0.35).unwrap().sample(&mut rng);
    let month_noise = LogNormal::new(0.0, 0.15).unwrap();

    let decline = |m: YearMonth| -> f64 {
        match termination_month {
            Some(t) => {
                let k = t.months_since(m);
                if k <= 0 {
                    1.0 - s
                } else if k <= DECLINE_MONTHS {
                    1.0 - s * (DECLINE_MONTHS + 1 - k) as f64 / DECLINE_MONTHS as f64
                } else {
                    1.0
                }
            }
            None => 1.0,
        }
    };

    let mut billing = Vec::new();
    let mut usage = Vec::new();
    let mut requests = Vec::new();
    let mut last_bill = price_start;
    let mut outstanding = Cents(0);
    for m in covered.months() {
        if termination_month.is_some_and(|t| m > t) {
            break;
        }
        let factor = decline(m);
        let (download_mb, upload_mb) = if broadband {
            let dl = dl_base * month_noise.sample(&mut rng) * factor;
            let ul = dl_base * ul_ratio * month_noise.sample(&mut rng) * factor;
            (round2(dl), round2(ul))
        } else {
            (0.0, 0.0)
        };
        let voice_minutes = round2(voice_base * month_noise.sample(&mut rng) * (1.0 - (1.0 - factor) / 2.0));
        let voice_calls = Poisson::new(voice_minutes / 3.0 + 1e-9).unwrap().sample(&mut rng) as u32;
        usage.push(UsageMonthRecord {
            billing_id: billing_id.clone(),
            month: m,
            download_mb,
            upload_mb,
            voice_minutes,
            voice_calls,
        });

        let extra = (voice_minutes * 2.0) as i64 + rng.random_range(0..800);
        let current = Cents(price_start.0 + extra);
        let amt_2pay = Cents(current.0 + outstanding.0);
        let paid = match rng.random_range(0..100) {
            0..=84 => amt_2pay.0,
            85..=94 => amt_2pay.0 / 2,
            _ => 0,
        };
        let credit_adj = if rng.random_bool(0.1) {
            Cents(-rng.random_range(500..3000))
        } else {
            Cents(0)
        };
        let payment = Cents(-paid);
        outstanding = Cents(amt_2pay.0 + payment.0 + credit_adj.0);
        billing.push(BillingMonthRecord {
            billing_id: billing_id.clone(),
            month: m,
            current_bill_amt: current,
            last_bill_amt: last_bill,
            amt_2pay,
            outstanding,
            payment,
            credit_adj,
        });
        last_bill = current;

        let complaint_boost = match termination_month {
            Some(t) if (1..=3).contains(&t.months_since(m)) => 0.3 * s,
            _ => 0.0,
        };
        let n_requests = Poisson::new(0.15 + complaint_boost).unwrap().sample(&mut rng) as usize;
        for _ in 0..n_requests {
            let date = day_in(&mut rng, m);
            let code = REQUEST_CODES[rng.random_range(0..REQUEST_CODES.len())].to_string();
            requests.push((date, code));
        }
    }

    Draft {
        joins_previous,
        record: SubscriberRecord {
            customer_id: String::new(),
            billing_id,
            service_id,
            segment,
            service_type,
            activation_date,
            customer_since: candidate_since,
            contract_period,
            price_start,
            t_location,
            hsbb_area,
            termination_date,
            comeback_date,
        },
        candidate_since,
        billing,
        usage,
        requests,
    }
}
