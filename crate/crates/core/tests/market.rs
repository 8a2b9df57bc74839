use std::collections::{BTreeMap, BTreeSet};

use patchscale_core::market::{
    build_all_series, build_series, filter_active_firms, inventory, ActivityThresholds, FirmId, Side,
    StockId, Trade, YearCoverage,
};
use proptest::prelude::*;

const Y2002: u64 = 1_009_843_200;
const Y2003: u64 = 1_041_379_200;
const DAY: u64 = 86_400;

fn t(ts: u64, firm: &str, stock: &str, side: Side, v: f64) -> Trade {
    Trade::new(ts, firm.into(), stock.into(), side, v).unwrap()
}

/// `per_day` trades on each of `days` consecutive days from `start`.
fn burst(firm: &str, start: u64, days: u64, per_day: u64) -> Vec<Trade> {
    (0..days)
        .flat_map(|d| (0..per_day).map(move |i| (d, i)))
        .map(|(d, i)| t(start + d * DAY + i, firm, "TEF", Side::Buy, 10.0))
        .collect()
}

fn strict(trades: u64, days: u64) -> ActivityThresholds {
    ActivityThresholds {
        min_trades_per_year: trades,
        min_active_days: days,
        coverage: YearCoverage::Strict,
    }
}

/// Independent every-year rule over explicit (year, day) bookkeeping.
fn brute_force(trades: &[Trade], th: &ActivityThresholds) -> BTreeSet<FirmId> {
    let year_of = |ts: u64| if ts >= Y2003 { 2003 } else { 2002 };
    let years: BTreeSet<i32> = trades.iter().map(|x| year_of(x.timestamp)).collect();
    let mut counts: BTreeMap<(FirmId, i32), (u64, BTreeSet<u64>)> = BTreeMap::new();
    for x in trades {
        let e = counts.entry((x.firm.clone(), year_of(x.timestamp))).or_default();
        e.0 += 1;
        e.1.insert(x.timestamp / DAY);
    }
    let firms: BTreeSet<FirmId> = trades.iter().map(|x| x.firm.clone()).collect();
    firms
        .into_iter()
        .filter(|f| {
            years.iter().all(|y| {
                counts.get(&(f.clone(), *y)).is_some_and(|(n, d)| {
                    *n >= th.min_trades_per_year && d.len() as u64 >= th.min_active_days
                })
            })
        })
        .collect()
}

#[test]
fn activity_examples() {
    let th = ActivityThresholds::default();
    let mut tape = burst("A", Y2002, 250, 5);
    tape.extend(burst("B", Y2002, 50, 100));
    let kept = filter_active_firms(&tape, &th);
    assert_eq!(kept, BTreeSet::from([FirmId::from("A")]));
}

#[test]
fn two_year_every_year_rule() {
    // A qualifies in both years, B only in 2002, C only in 2003.
    let mut tape = burst("A", Y2002, 250, 5);
    tape.extend(burst("A", Y2003, 250, 5));
    tape.extend(burst("B", Y2002, 260, 5));
    tape.extend(burst("B", Y2003, 20, 5));
    tape.extend(burst("C", Y2003, 300, 4));
    let th = ActivityThresholds::default();
    let kept = filter_active_firms(&tape, &th);
    assert_eq!(kept, BTreeSet::from([FirmId::from("A")]));
    assert_eq!(kept, brute_force(&tape, &th));
}

#[test]
fn prorated_years_scale_thresholds() {
    // The tape covers only the first 100 days of 2002.
    let tape = burst("A", Y2002, 100, 5);
    assert!(filter_active_firms(&tape, &ActivityThresholds::default()).is_empty());
    let prorated = ActivityThresholds {
        coverage: YearCoverage::Prorated,
        ..ActivityThresholds::default()
    };
    assert_eq!(filter_active_firms(&tape, &prorated).len(), 1);
}

#[test]
fn out_of_order_input_is_sorted() {
    let tape = vec![
        t(5, "F", "S", Side::Buy, 5.0),
        t(1, "G", "S", Side::Buy, 9.0),
        t(3, "F", "S", Side::Sell, 3.0),
        t(1, "F", "S", Side::Buy, 1.0),
        t(3, "F", "S", Side::Buy, 4.0),
    ];
    let s = build_series(&tape, &"F".into(), &"S".into());
    assert_eq!(s.timestamps, vec![1, 3, 3, 5]);
    assert_eq!(s.values, vec![1.0, -3.0, 4.0, 5.0]);
}

fn arb_tape() -> impl Strategy<Value = Vec<Trade>> {
    prop::collection::vec(
        (0u64..2 * 365, 0u64..3, 0usize..4, 0usize..2, any::<bool>(), 0.01f64..1e6),
        0..300,
    )
    .prop_map(|rows| {
        rows.into_iter()
            .map(|(day, sec, firm, stock, buy, v)| {
                let side = if buy { Side::Buy } else { Side::Sell };
                let firm = format!("F{firm}");
                let stock = format!("S{stock}");
                t(Y2002 + day * DAY + sec, &firm, &stock, side, v)
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn series_length_and_sum(tape in arb_tape()) {
        for firm in ["F0", "F1", "F2", "F3"] {
            for stock in ["S0", "S1"] {
                let (f, s): (FirmId, StockId) = (firm.into(), stock.into());
                let series = build_series(&tape, &f, &s);
                let matching: Vec<&Trade> = tape.iter().filter(|x| x.firm == f && x.stock == s).collect();
                prop_assert_eq!(series.len(), matching.len());
                let buys: f64 = matching.iter().filter(|x| x.side == Side::Buy).map(|x| x.value).sum();
                let sells: f64 = matching.iter().filter(|x| x.side == Side::Sell).map(|x| x.value).sum();
                let total: f64 = series.values.iter().sum();
                prop_assert!((total - (buys - sells)).abs() <= 1e-9 * (buys + sells).max(1.0));
                prop_assert!(series.timestamps.windows(2).all(|w| w[0] <= w[1]));
                if let Some(&(_, last)) = inventory(&series).last() {
                    prop_assert!((last - total).abs() <= 1e-9 * (buys + sells).max(1.0));
                }
            }
        }
        let all = build_all_series(&tape);
        prop_assert_eq!(all.values().map(|s| s.len()).sum::<usize>(), tape.len());
    }

    #[test]
    fn filter_is_monotone(tape in arb_tape(), a in 0u64..80, b in 0u64..80, da in 0u64..40, db in 0u64..40) {
        let lo = filter_active_firms(&tape, &strict(a.min(b), da.min(db)));
        let hi = filter_active_firms(&tape, &strict(a.max(b), da.max(db)));
        prop_assert!(hi.is_subset(&lo));
        prop_assert_eq!(&lo, &brute_force(&tape, &strict(a.min(b), da.min(db))));
    }
}
