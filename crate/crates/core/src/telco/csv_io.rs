use std::collections::HashSet;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;

use super::{BillingMonthRecord, ServiceRequestRecord, SubscriberRecord, TelcoDataset, UsageMonthRecord};
use crate::error::DataError;

pub const SUBSCRIBERS_FILE: &str = "subscribers.csv";
pub const BILLING_FILE: &str = "billing.csv";
pub const USAGE_FILE: &str = "usage.csv";
pub const REQUESTS_FILE: &str = "service_requests.csv";

const SUBSCRIBER_HEADER: &[&str] = &[
    "customer_id",
    "billing_id",
    "service_id",
    "segment",
    "service_type",
    "activation_date",
    "customer_since",
    "contract_period",
    "price_start",
    "t_location",
    "hsbb_area",
    "termination_date",
    "comeback_date",
];
const BILLING_HEADER: &[&str] = &[
    "billing_id",
    "month",
    "current_bill_amt",
    "last_bill_amt",
    "amt_2pay",
    "outstanding",
    "payment",
    "credit_adj",
];
const USAGE_HEADER: &[&str] = &["billing_id", "month", "download_mb", "upload_mb", "voice_minutes", "voice_calls"];
const REQUEST_HEADER: &[&str] = &["customer_id", "request_date", "request_code"];

/// Writes the four tables as CSV in canonical row order.
pub fn write_tables(dataset: &TelcoDataset, dir: &Path) -> Result<(), DataError> {
    std::fs::create_dir_all(dir).map_err(|source| DataError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut sorted = dataset.clone();
    sorted.sort();
    let dataset = &sorted;

    write_file(
        &dir.join(SUBSCRIBERS_FILE),
        SUBSCRIBER_HEADER,
        dataset.subscribers.iter().map(|s| {
            vec![
                s.customer_id.clone(),
                s.billing_id.clone(),
                s.service_id.clone(),
                s.segment.as_str().to_string(),
                s.service_type.as_str().to_string(),
                s.activation_date.to_string(),
                s.customer_since.to_string(),
                s.contract_period.to_string(),
                s.price_start.to_string(),
                s.t_location.clone(),
                u8::from(s.hsbb_area).to_string(),
                s.termination_date.map(|d| d.to_string()).unwrap_or_default(),
                s.comeback_date.map(|d| d.to_string()).unwrap_or_default(),
            ]
        }),
    )?;
    write_file(
        &dir.join(BILLING_FILE),
        BILLING_HEADER,
        dataset.billing.iter().map(|b| {
            vec![
                b.billing_id.clone(),
                b.month.to_string(),
                b.current_bill_amt.to_string(),
                b.last_bill_amt.to_string(),
                b.amt_2pay.to_string(),
                b.outstanding.to_string(),
                b.payment.to_string(),
                b.credit_adj.to_string(),
            ]
        }),
    )?;
    write_file(
        &dir.join(USAGE_FILE),
        USAGE_HEADER,
        dataset.usage.iter().map(|u| {
            vec![
                u.billing_id.clone(),
                u.month.to_string(),
                u.download_mb.to_string(),
                u.upload_mb.to_string(),
                u.voice_minutes.to_string(),
                u.voice_calls.to_string(),
            ]
        }),
    )?;
    write_file(
        &dir.join(REQUESTS_FILE),
        REQUEST_HEADER,
        dataset
            .service_requests
            .iter()
            .map(|r| vec![r.customer_id.clone(), r.request_date.to_string(), r.request_code.clone()]),
    )
}

fn write_file(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<(), DataError> {
    let io_err = |e: csv::Error| DataError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(io_err)?;
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads and validates the four tables from `dir`.
pub fn read_tables(dir: &Path) -> Result<TelcoDataset, DataError> {
    let mut dataset = TelcoDataset::default();

    let mut subscriber_keys = HashSet::new();
    read_file(&dir.join(SUBSCRIBERS_FILE), SUBSCRIBER_HEADER, |f| {
        let s = SubscriberRecord {
            customer_id: f.text(0)?,
            billing_id: f.text(1)?,
            service_id: f.text(2)?,
            segment: f.parse(3)?,
            service_type: f.parse(4)?,
            activation_date: f.date(5)?,
            customer_since: f.date(6)?,
            contract_period: f.parse(7)?,
            price_start: f.parse(8)?,
            t_location: f.text(9)?,
            hsbb_area: match f.get(10) {
                "0" => false,
                "1" => true,
                other => return Err(format!("hsbb_area must be 0 or 1, got {other:?}")),
            },
            termination_date: f.optional_date(11)?,
            comeback_date: f.optional_date(12)?,
        };
        if s.price_start.0 < 0 {
            return Err("price_start must be non-negative".into());
        }
        s.check()?;
        if !subscriber_keys.insert((s.customer_id.clone(), s.billing_id.clone(), s.service_id.clone())) {
            return Err(format!(
                "duplicate subscriber key ({}, {}, {})",
                s.customer_id, s.billing_id, s.service_id
            ));
        }
        dataset.subscribers.push(s);
        Ok(())
    })?;

    let billing_ids: HashSet<String> = dataset.subscribers.iter().map(|s| s.billing_id.clone()).collect();
    let customer_ids: HashSet<String> = dataset.subscribers.iter().map(|s| s.customer_id.clone()).collect();

    let mut seen = HashSet::new();
    read_file(&dir.join(BILLING_FILE), BILLING_HEADER, |f| {
        let b = BillingMonthRecord {
            billing_id: f.text(0)?,
            month: f.parse(1)?,
            current_bill_amt: f.parse(2)?,
            last_bill_amt: f.parse(3)?,
            amt_2pay: f.parse(4)?,
            outstanding: f.parse(5)?,
            payment: f.parse(6)?,
            credit_adj: f.parse(7)?,
        };
        if !billing_ids.contains(&b.billing_id) {
            return Err(format!("unknown billing_id {}", b.billing_id));
        }
        if !seen.insert((b.billing_id.clone(), b.month)) {
            return Err(format!("duplicate (billing_id, month) = ({}, {})", b.billing_id, b.month));
        }
        dataset.billing.push(b);
        Ok(())
    })?;

    seen.clear();
    read_file(&dir.join(USAGE_FILE), USAGE_HEADER, |f| {
        let u = UsageMonthRecord {
            billing_id: f.text(0)?,
            month: f.parse(1)?,
            download_mb: f.parse(2)?,
            upload_mb: f.parse(3)?,
            voice_minutes: f.parse(4)?,
            voice_calls: f.parse(5)?,
        };
        u.check()?;
        if !billing_ids.contains(&u.billing_id) {
            return Err(format!("unknown billing_id {}", u.billing_id));
        }
        if !seen.insert((u.billing_id.clone(), u.month)) {
            return Err(format!("duplicate (billing_id, month) = ({}, {})", u.billing_id, u.month));
        }
        dataset.usage.push(u);
        Ok(())
    })?;

    read_file(&dir.join(REQUESTS_FILE), REQUEST_HEADER, |f| {
        let r = ServiceRequestRecord {
            customer_id: f.text(0)?,
            request_date: f.date(1)?,
            request_code: f.text(2)?,
        };
        if !customer_ids.contains(&r.customer_id) {
            return Err(format!("unknown customer_id {}", r.customer_id));
        }
        dataset.service_requests.push(r);
        Ok(())
    })?;

    dataset.validate()?;
    Ok(dataset)
}

struct Fields<'a> {
    record: &'a csv::StringRecord,
    header: &'a [&'a str],
}

impl Fields<'_> {
    fn get(&self, i: usize) -> &str {
        self.record.get(i).unwrap_or("")
    }

    fn text(&self, i: usize) -> Result<String, String> {
        let v = self.get(i);
        if v.is_empty() {
            return Err(format!("{} is empty", self.header[i]));
        }
        Ok(v.to_string())
    }

    fn parse<T: FromStr>(&self, i: usize) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        self.get(i)
            .parse()
            .map_err(|e| format!("{}: {e} ({:?})", self.header[i], self.get(i)))
    }

    fn date(&self, i: usize) -> Result<NaiveDate, String> {
        NaiveDate::parse_from_str(self.get(i), "%Y-%m-%d").map_err(|e| format!("{}: invalid date {:?}: {e}", self.header[i], self.get(i)))
    }

    fn optional_date(&self, i: usize) -> Result<Option<NaiveDate>, String> {
        if self.get(i).is_empty() {
            Ok(None)
        } else {
            self.date(i).map(Some)
        }
    }
}

fn read_file(path: &Path, header: &[&str], mut on_row: impl FnMut(&Fields<'_>) -> Result<(), String>) -> Result<(), DataError> {
    let path_buf = || PathBuf::from(path);
    let file = File::open(path).map_err(|source| DataError::Io { path: path_buf(), source })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let malformed = |line: u64, message: String| DataError::Malformed {
        path: path_buf(),
        line,
        message,
    };

    let found = reader.headers().map_err(|e| malformed(1, e.to_string()))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(malformed(
            1,
            format!(
                "expected header {:?}, found {:?}",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut record = csv::StringRecord::new();
    loop {
        let line = reader.position().line();
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = record.position().map_or(line, |p| p.line());
                if record.len() != header.len() {
                    return Err(malformed(line, format!("expected {} fields, found {}", header.len(), record.len())));
                }
                on_row(&Fields { record: &record, header }).map_err(|m| malformed(line, m))?;
            }
            Err(e) => {
                let line = e.position().map_or(line, |p| p.line());
                return Err(malformed(line, e.to_string()));
            }
        }
    }
    Ok(())
}
