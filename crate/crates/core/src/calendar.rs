//! Whole-month calendar arithmetic. Day-of-month is ignored everywhere a
//! [`YearMonth`] is used.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};

use crate::error::ParseError;

/// A calendar month, ordered chronologically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    year: i32,
    month: u32,
}

impl YearMonth {
    /// Panics if `month` is not in `1..=12`.
    pub fn new(year: i32, month: u32) -> Self {
        assert!((1..=12).contains(&month), "month out of range: {month}");
        Self { year, month }
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u32 {
        self.month
    }

    pub fn of(date: NaiveDate) -> Self {
        Self::new(date.year(), date.month())
    }

    fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    fn from_ordinal(ordinal: i64) -> Self {
        Self::new(ordinal.div_euclid(12) as i32, ordinal.rem_euclid(12) as u32 + 1)
    }

    pub fn add_months(self, months: i64) -> Self {
        Self::from_ordinal(self.ordinal() + months)
    }

    /// Whole months from `earlier` to `self` (negative if `earlier` is later).
    pub fn months_since(self, earlier: YearMonth) -> i64 {
        self.ordinal() - earlier.ordinal()
    }

    pub fn first_day(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, self.month, 1).expect("valid first day")
    }

    pub fn days_in_month(self) -> u32 {
        let next = self.add_months(1).first_day();
        (next - self.first_day()).num_days() as u32
    }

    /// Compact `YYMM` stamp used in feature names, e.g. `1110` for 2011-10.
    pub fn stamp(self) -> String {
        format!("{:02}{:02}", self.year.rem_euclid(100), self.month)
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseError(format!("invalid year-month {s:?}, expected YYYY-MM"));
        let (y, m) = s.split_once('-').ok_or_else(bad)?;
        if y.len() != 4 || m.len() != 2 {
            return Err(bad());
        }
        let year: i32 = y.parse().map_err(|_| bad())?;
        let month: u32 = m.parse().map_err(|_| bad())?;
        if !(1..=12).contains(&month) {
            return Err(bad());
        }
        Ok(Self::new(year, month))
    }
}

/// Inclusive, non-empty range of consecutive months.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MonthRange {
    start: YearMonth,
    end: YearMonth,
}

impl MonthRange {
    /// Returns `None` when `end < start`.
    pub fn new(start: YearMonth, end: YearMonth) -> Option<Self> {
        (start <= end).then_some(Self { start, end })
    }

    pub fn start(self) -> YearMonth {
        self.start
    }

    pub fn end(self) -> YearMonth {
        self.end
    }

    pub fn len(self) -> usize {
        (self.end.months_since(self.start) + 1) as usize
    }

    pub fn is_empty(self) -> bool {
        false
    }

    pub fn contains(self, month: YearMonth) -> bool {
        self.start <= month && month <= self.end
    }

    pub fn contains_range(self, other: MonthRange) -> bool {
        self.contains(other.start) && self.contains(other.end)
    }

    pub fn overlaps(self, other: MonthRange) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    pub fn months(self) -> impl Iterator<Item = YearMonth> {
        (0..self.len() as i64).map(move |i| self.start.add_months(i))
    }
}

impl fmt::Display for MonthRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl FromStr for MonthRange {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| ParseError(format!("invalid month range {s:?}, expected YYYY-MM..YYYY-MM")))?;
        let (a, b) = (a.trim().parse()?, b.trim().parse()?);
        MonthRange::new(a, b).ok_or_else(|| ParseError(format!("empty month range {s:?}")))
    }
}

pub fn ym(year: i32, month: u32) -> YearMonth {
    YearMonth::new(year, month)
}

/// Shorthand for an inclusive range; panics on an empty range.
pub fn months(start: YearMonth, end: YearMonth) -> MonthRange {
    MonthRange::new(start, end).expect("non-empty month range")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn month_difference_matches_day_counting() {
        // oracle: count month boundaries crossed by stepping day by day
        let from = NaiveDate::from_ymd_opt(2010, 7, 15).unwrap();
        let to = NaiveDate::from_ymd_opt(2011, 10, 3).unwrap();
        let mut boundaries = 0;
        let mut d = from;
        while d < to {
            let next = d.succ_opt().unwrap();
            if next.day() == 1 {
                boundaries += 1;
            }
            d = next;
        }
        assert_eq!(boundaries, 15);
        assert_eq!(YearMonth::of(to).months_since(YearMonth::of(from)), 15);
    }

    #[test]
    fn arithmetic_wraps_years() {
        assert_eq!(ym(2011, 11).add_months(2), ym(2012, 1));
        assert_eq!(ym(2011, 6).add_months(-3), ym(2011, 3));
        assert_eq!(ym(2012, 1).add_months(-1), ym(2011, 12));
        assert_eq!(ym(2011, 2).days_in_month(), 28);
        assert_eq!(ym(2012, 2).days_in_month(), 29);
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("2011-08".parse::<YearMonth>().unwrap(), ym(2011, 8));
        assert!("2011-13".parse::<YearMonth>().is_err());
        assert!("2011-8".parse::<YearMonth>().is_err());
        assert_eq!(ym(2011, 10).stamp(), "1110");
        let r: MonthRange = "2011-04..2011-10".parse().unwrap();
        assert_eq!(r.len(), 7);
        assert_eq!(r.to_string(), "2011-04..2011-10");
        assert!("2011-10..2011-04".parse::<MonthRange>().is_err());
    }

    #[test]
    fn range_overlap() {
        let a = months(ym(2011, 8), ym(2011, 10));
        assert!(!a.overlaps(months(ym(2011, 11), ym(2012, 1))));
        assert!(a.overlaps(months(ym(2011, 10), ym(2011, 12))));
        assert_eq!(a.months().collect::<Vec<_>>(), vec![ym(2011, 8), ym(2011, 9), ym(2011, 10)]);
    }
}
