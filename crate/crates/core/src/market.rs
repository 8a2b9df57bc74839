//! Trade records, per-(firm, stock) signed series and the active-firm filter.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SECONDS_PER_DAY: u64 = 86_400;

/// Opaque firm identifier.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(transparent))]
pub struct FirmId(pub String);

/// Opaque stock identifier.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(transparent))]
pub struct StockId(pub String);

impl fmt::Display for FirmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for StockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for FirmId {
    fn from(s: &str) -> Self {
        FirmId(s.into())
    }
}

impl From<&str> for StockId {
    fn from(s: &str) -> Self {
        StockId(s.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Buy => 1.0,
            Side::Sell => -1.0,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Buy => Side::Sell,
            Side::Sell => Side::Buy,
        }
    }
}

/// One transaction. `value` is in Euros and strictly positive.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Trade {
    pub timestamp: u64,
    pub firm: FirmId,
    pub stock: StockId,
    pub side: Side,
    pub value: f64,
}

impl Trade {
    pub fn new(timestamp: u64, firm: FirmId, stock: StockId, side: Side, value: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::param("value", alloc::format!("must be finite and > 0, got {value}")));
        }
        Ok(Trade {
            timestamp,
            firm,
            stock,
            side,
            value,
        })
    }

    pub fn signed_value(&self) -> f64 {
        self.side.sign() * self.value
    }
}

/// Signed traded values of one firm in one stock, in time order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SignedSeries {
    pub firm: FirmId,
    pub stock: StockId,
    pub timestamps: Vec<u64>,
    pub values: Vec<f64>,
}

impl SignedSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.timestamps.iter().copied().zip(self.values.iter().copied())
    }
}

/// Series of `firm` in `stock`, stably sorted by timestamp.
pub fn build_series(trades: &[Trade], firm: &FirmId, stock: &StockId) -> SignedSeries {
    let mut picked: Vec<&Trade> = trades
        .iter()
        .filter(|t| &t.firm == firm && &t.stock == stock)
        .collect();
    // `sort_by_key` is stable, so equal timestamps keep input order.
    picked.sort_by_key(|t| t.timestamp);
    SignedSeries {
        firm: firm.clone(),
        stock: stock.clone(),
        timestamps: picked.iter().map(|t| t.timestamp).collect(),
        values: picked.iter().map(|t| t.signed_value()).collect(),
    }
}

/// Every non-empty series in the tape, keyed by (stock, firm).
pub fn build_all_series(trades: &[Trade]) -> BTreeMap<(StockId, FirmId), SignedSeries> {
    let mut groups: BTreeMap<(StockId, FirmId), Vec<&Trade>> = BTreeMap::new();
    for t in trades {
        groups
            .entry((t.stock.clone(), t.firm.clone()))
            .or_default()
            .push(t);
    }
    groups
        .into_iter()
        .map(|(key, mut picked)| {
            picked.sort_by_key(|t| t.timestamp);
            let series = SignedSeries {
                firm: key.1.clone(),
                stock: key.0.clone(),
                timestamps: picked.iter().map(|t| t.timestamp).collect(),
                values: picked.iter().map(|t| t.signed_value()).collect(),
            };
            (key, series)
        })
        .collect()
}

/// Cumulative signed value after each trade.
pub fn inventory(series: &SignedSeries) -> Vec<(u64, f64)> {
    let mut acc = 0.0;
    series
        .entries()
        .map(|(t, v)| {
            acc += v;
            (t, acc)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Calendar

/// Civil (proleptic Gregorian, UTC) year and day-of-year for a day count
/// since 1970-01-01.
pub fn civil_year(days_since_epoch: u64) -> i64 {
    // Hinnant's days-to-civil.
    let z = days_since_epoch as i64 + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    if m <= 2 {
        y + 1
    } else {
        y
    }
}

pub fn is_leap(year: i64) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

pub fn days_in_year(year: i64) -> u64 {
    if is_leap(year) {
        366
    } else {
        365
    }
}

/// Days since epoch of January 1st of `year` (year ≥ 1970).
pub fn year_start_day(year: i64) -> u64 {
    (1970..year).map(days_in_year).sum()
}

// ---------------------------------------------------------------------------
// Activity filter

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FirmActivity {
    pub firm: FirmId,
    pub trades_per_year: BTreeMap<i64, u64>,
    pub active_days_per_year: BTreeMap<i64, u64>,
}

/// How years only partly covered by the dataset are judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "kebab-case"))]
pub enum YearCoverage {
    /// Full thresholds in every year.
    #[default]
    Strict,
    /// Thresholds scaled by the fraction of the year inside the dataset span.
    Prorated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ActivityThresholds {
    pub min_trades_per_year: u64,
    pub min_active_days: u64,
    pub coverage: YearCoverage,
}

impl Default for ActivityThresholds {
    fn default() -> Self {
        ActivityThresholds {
            min_trades_per_year: 1000,
            min_active_days: 200,
            coverage: YearCoverage::Strict,
        }
    }
}

pub fn firm_activity(trades: &[Trade]) -> BTreeMap<FirmId, FirmActivity> {
    let mut days: BTreeMap<&FirmId, BTreeSet<u64>> = BTreeMap::new();
    let mut out: BTreeMap<FirmId, FirmActivity> = BTreeMap::new();
    for t in trades {
        let day = t.timestamp / SECONDS_PER_DAY;
        let year = civil_year(day);
        let entry = out.entry(t.firm.clone()).or_insert_with(|| FirmActivity {
            firm: t.firm.clone(),
            ..Default::default()
        });
        *entry.trades_per_year.entry(year).or_insert(0) += 1;
        days.entry(&t.firm).or_default().insert(day);
    }
    for (firm, set) in days {
        let act = out.get_mut(firm).expect("firm seen");
        for &day in &set {
            *act.active_days_per_year.entry(civil_year(day)).or_insert(0) += 1;
        }
    }
    out
}

/// Firms meeting both thresholds in every calendar year the tape covers.
pub fn filter_active_firms(trades: &[Trade], thresholds: &ActivityThresholds) -> BTreeSet<FirmId> {
    let Some(first_day) = trades.iter().map(|t| t.timestamp / SECONDS_PER_DAY).min() else {
        return BTreeSet::new();
    };
    let last_day = trades
        .iter()
        .map(|t| t.timestamp / SECONDS_PER_DAY)
        .max()
        .unwrap_or(first_day);
    let years: BTreeSet<i64> = trades
        .iter()
        .map(|t| civil_year(t.timestamp / SECONDS_PER_DAY))
        .collect();

    let coverage = |year: i64| -> f64 {
        match thresholds.coverage {
            YearCoverage::Strict => 1.0,
            YearCoverage::Prorated => {
                let start = year_start_day(year);
                let end = start + days_in_year(year) - 1;
                let covered = end.min(last_day) + 1 - start.max(first_day);
                covered as f64 / days_in_year(year) as f64
            }
        }
    };

    firm_activity(trades)
        .into_values()
        .filter(|act| {
            years.iter().all(|&y| {
                let frac = coverage(y);
                let trades = act.trades_per_year.get(&y).copied().unwrap_or(0) as f64;
                let days = act.active_days_per_year.get(&y).copied().unwrap_or(0) as f64;
                trades >= thresholds.min_trades_per_year as f64 * frac
                    && days >= thresholds.min_active_days as f64 * frac
            })
        })
        .map(|act| act.firm)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn trade(t: u64, firm: &str, side: Side, v: f64) -> Trade {
        Trade::new(t, firm.into(), "TEF".into(), side, v).unwrap()
    }

    #[test]
    fn rejects_non_positive_values() {
        assert!(Trade::new(0, "F".into(), "S".into(), Side::Buy, 0.0).is_err());
        assert!(Trade::new(0, "F".into(), "S".into(), Side::Buy, -5.0).is_err());
        assert!(Trade::new(0, "F".into(), "S".into(), Side::Buy, f64::NAN).is_err());
    }

    #[test]
    fn sign_convention() {
        let trades = vec![trade(1, "F01", Side::Buy, 100.0), trade(2, "F01", Side::Sell, 40.0)];
        let s = build_series(&trades, &"F01".into(), &"TEF".into());
        assert_eq!(s.timestamps, vec![1, 2]);
        assert_eq!(s.values, vec![100.0, -40.0]);
    }

    #[test]
    fn filters_other_firms_and_sorts_stably() {
        let trades = vec![
            trade(5, "A", Side::Buy, 1.0),
            trade(3, "B", Side::Buy, 9.0),
            trade(3, "A", Side::Sell, 2.0),
            trade(3, "A", Side::Buy, 3.0),
            trade(1, "A", Side::Buy, 4.0),
        ];
        let s = build_series(&trades, &"A".into(), &"TEF".into());
        assert_eq!(s.timestamps, vec![1, 3, 3, 5]);
        assert_eq!(s.values, vec![4.0, -2.0, 3.0, 1.0]);
        assert!(build_series(&trades, &"C".into(), &"TEF".into()).is_empty());
    }

    #[test]
    fn inventory_prefix_sums() {
        let trades = vec![trade(1, "F01", Side::Buy, 100.0), trade(2, "F01", Side::Sell, 40.0)];
        let s = build_series(&trades, &"F01".into(), &"TEF".into());
        assert_eq!(inventory(&s), vec![(1, 100.0), (2, 60.0)]);
        assert!(inventory(&SignedSeries::default()).is_empty());
    }

    #[test]
    fn calendar_years() {
        // 2002-01-01T00:00:00Z
        assert_eq!(civil_year(1_009_843_200 / SECONDS_PER_DAY), 2002);
        assert_eq!(civil_year(1_009_843_199 / SECONDS_PER_DAY), 2001);
        // 2004-12-31 and 2005-01-01
        assert_eq!(civil_year(12_783), 2004);
        assert_eq!(civil_year(12_784), 2005);
        assert_eq!(year_start_day(2002) * SECONDS_PER_DAY, 1_009_843_200);
        assert_eq!(days_in_year(2004), 366);
        assert_eq!(days_in_year(1900), 365);
    }

    #[test]
    fn empty_tape_has_no_active_firms() {
        assert!(filter_active_firms(&[], &ActivityThresholds::default()).is_empty());
    }
}
