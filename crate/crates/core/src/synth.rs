//! Synthetic trade tapes with planted packages.
//!
//! Each firm gets a Pareto-distributed size. Its packages have lognormal
//! values whose location grows with the size, and each package is executed
//! as a run of same-sign child trades, optionally salted with small
//! opposite-sign trades. Between packages a firm idles or churns.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use rand::Rng as _;
use rand_distr::{Distribution, Exp, Pareto, StandardNormal};

use crate::error::{Error, Result};
use crate::market::{FirmId, Side, StockId, Trade};
use crate::math::{exp, floor, ln, powf};
use crate::rng::{rng_from, tag, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "kebab-case"))]
pub enum SizeSampling {
    /// Independent Pareto draws.
    #[default]
    Iid,
    /// Pareto quantiles at `(i + 0.5) / n`: same law, no sampling noise.
    Stratified,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(deny_unknown_fields))]
pub struct CountRange {
    pub min: usize,
    pub max: usize,
}

/// `ln V = base_log_value + size_elasticity * ln S + sigma * Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(default, deny_unknown_fields))]
pub struct PackageValue {
    pub base_log_value: f64,
    pub size_elasticity: f64,
    pub sigma: f64,
}

impl Default for PackageValue {
    fn default() -> Self {
        PackageValue {
            base_log_value: 11.5,
            size_elasticity: 1.0,
            sigma: 0.8,
        }
    }
}

/// How a package of value `V` is worked. With `z = ln V - base_log_value`:
/// `ln N = ln base_trades + trades_elasticity * z + trades_sigma * Z` and
/// `ln T = ln base_duration_secs + duration_elasticity * z + duration_sigma * Z'`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(default, deny_unknown_fields))]
pub struct Execution {
    pub base_trades: f64,
    pub trades_elasticity: f64,
    pub trades_sigma: f64,
    pub min_trades: usize,
    pub max_trades: usize,
    /// Log-scale spread of child-trade values around `V / N`.
    pub child_value_sigma: f64,
    pub base_duration_secs: f64,
    pub duration_elasticity: f64,
    pub duration_sigma: f64,
    pub max_duration_secs: u64,
    /// Mean idle time between consecutive packages in one stock. Kept short
    /// against package durations: a boundary found a few trades off would
    /// otherwise drag a whole idle gap into the measured duration.
    pub mean_gap_secs: f64,
}

impl Default for Execution {
    fn default() -> Self {
        Execution {
            base_trades: 50.0,
            trades_elasticity: 1.0,
            trades_sigma: 0.3,
            min_trades: 10,
            max_trades: 100_000,
            child_value_sigma: 0.3,
            base_duration_secs: 3600.0,
            duration_elasticity: 1.5,
            duration_sigma: 0.5,
            max_duration_secs: 315_360_000,
            mean_gap_secs: 600.0,
        }
    }
}

/// Non-directional stretches between packages: fair-coin sides, values at
/// the firm's typical child size.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(default, deny_unknown_fields))]
pub struct Churn {
    pub probability: f64,
    pub trades: CountRange,
    pub mean_spacing_secs: f64,
}

impl Default for Churn {
    fn default() -> Self {
        Churn {
            probability: 0.0,
            trades: CountRange { min: 10, max: 30 },
            mean_spacing_secs: 60.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(default, deny_unknown_fields))]
pub struct SynthConfig {
    pub n_firms: usize,
    /// CCDF exponent of firm sizes.
    pub zipf_exponent: f64,
    pub size_sampling: SizeSampling,
    pub stocks: usize,
    pub packages_per_firm: CountRange,
    pub package_value: PackageValue,
    pub execution: Execution,
    pub churn: Churn,
    /// Opposite-sign value injected into each package, as a share of the
    /// package's traded value (upper bound).
    pub noise_fraction: f64,
    /// Directionality threshold the packages must clear.
    pub theta_target: f64,
    /// 2002-01-01T00:00:00Z.
    pub start_timestamp: u64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_firms: 100,
            zipf_exponent: 1.0,
            size_sampling: SizeSampling::Iid,
            stocks: 5,
            packages_per_firm: CountRange { min: 10, max: 20 },
            package_value: PackageValue::default(),
            execution: Execution::default(),
            churn: Churn::default(),
            noise_fraction: 0.0,
            theta_target: 0.75,
            start_timestamp: 1_009_843_200,
            seed: 1,
        }
    }
}

pub const PRESETS: [&str; 2] = ["default", "paper-like"];

impl SynthConfig {
    /// Calibrated so the pooled patches show `zeta_V ~ 2`, `zeta_N ~ 1.8`,
    /// `zeta_T ~ 1.3` and `g1 ~ 1.1`, `g2 ~ 1.9`, `g3 ~ 0.66`, while each
    /// firm's packages stay lognormal.
    pub fn paper_like() -> Self {
        SynthConfig {
            n_firms: 600,
            size_sampling: SizeSampling::Stratified,
            stocks: 1,
            package_value: PackageValue {
                base_log_value: 11.5,
                size_elasticity: 0.5,
                sigma: 0.6,
            },
            execution: Execution {
                trades_elasticity: 1.1,
                duration_elasticity: 1.65,
                ..Execution::default()
            },
            churn: Churn {
                probability: 0.1,
                ..Churn::default()
            },
            noise_fraction: 0.1,
            ..SynthConfig::default()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "default" => Some(SynthConfig::default()),
            "paper-like" => Some(SynthConfig::paper_like()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be finite and > 0, got {x}")))
            }
        };
        let non_negative = |name, x: f64| {
            if x >= 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be finite and >= 0, got {x}")))
            }
        };
        let range = |name, r: CountRange| {
            if r.min <= r.max {
                Ok(())
            } else {
                Err(Error::param(name, "min exceeds max"))
            }
        };
        if self.n_firms == 0 {
            return Err(Error::param("n_firms", "must be at least 1"));
        }
        if self.stocks == 0 {
            return Err(Error::param("stocks", "must be at least 1"));
        }
        positive("zipf_exponent", self.zipf_exponent)?;
        range("packages_per_firm", self.packages_per_firm)?;
        if !self.package_value.base_log_value.is_finite() {
            return Err(Error::param("package_value.base_log_value", "must be finite"));
        }
        positive("package_value.size_elasticity", self.package_value.size_elasticity)?;
        positive("package_value.sigma", self.package_value.sigma)?;
        let e = &self.execution;
        positive("execution.base_trades", e.base_trades)?;
        positive("execution.trades_elasticity", e.trades_elasticity)?;
        non_negative("execution.trades_sigma", e.trades_sigma)?;
        if e.min_trades < 2 || e.min_trades > e.max_trades {
            return Err(Error::param("execution.min_trades", "need 2 <= min_trades <= max_trades"));
        }
        non_negative("execution.child_value_sigma", e.child_value_sigma)?;
        positive("execution.base_duration_secs", e.base_duration_secs)?;
        positive("execution.duration_elasticity", e.duration_elasticity)?;
        non_negative("execution.duration_sigma", e.duration_sigma)?;
        if e.max_duration_secs == 0 {
            return Err(Error::param("execution.max_duration_secs", "must be at least 1"));
        }
        positive("execution.mean_gap_secs", e.mean_gap_secs)?;
        if !(0.0..=1.0).contains(&self.churn.probability) {
            return Err(Error::param("churn.probability", "must lie in [0, 1]"));
        }
        range("churn.trades", self.churn.trades)?;
        if self.churn.trades.min == 0 {
            return Err(Error::param("churn.trades", "min must be at least 1"));
        }
        positive("churn.mean_spacing_secs", self.churn.mean_spacing_secs)?;
        crate::patch::check_theta(self.theta_target)?;
        if !(self.noise_fraction >= 0.0 && self.noise_fraction < 1.0 - self.theta_target) {
            return Err(Error::param(
                "noise_fraction",
                format!("must lie in [0, 1 - theta_target) = [0, {})", 1.0 - self.theta_target),
            ));
        }
        Ok(())
    }
}

/// One package as planned, before execution.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PackagePlan {
    pub stock: usize,
    pub value: f64,
    pub n_trades: usize,
    pub duration: u64,
}

/// A package as emitted. Indices are positions in the firm's signed series
/// for `stock`, half-open.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PlantedPackage {
    pub firm: FirmId,
    pub stock: StockId,
    pub side: Side,
    pub start_index: usize,
    pub end_index: usize,
    pub start_time: u64,
    /// Dominant-side value: the sum of the child trades.
    pub v_m: f64,
    pub n_m: usize,
    pub duration: u64,
    pub noise_value: f64,
    pub noise_trades: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ChurnSegment {
    pub firm: FirmId,
    pub stock: StockId,
    pub start_index: usize,
    pub end_index: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct GroundTruth {
    pub firm_sizes: BTreeMap<FirmId, f64>,
    pub packages: Vec<PlantedPackage>,
    pub churn: Vec<ChurnSegment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticMarket {
    /// Sorted by timestamp; ties keep generation order.
    pub trades: Vec<Trade>,
    pub truth: GroundTruth,
}

/// I.i.d. Pareto sizes with `P(S > x) = x^-zipf_exponent`, `x >= 1`.
pub fn gen_firm_sizes(n: usize, zipf_exponent: f64, seed: u64) -> Result<Vec<f64>> {
    let law = Pareto::new(1.0, zipf_exponent)
        .map_err(|_| Error::param("zipf_exponent", "must be finite and > 0"))?;
    let mut rng = rng_from(seed, &[tag("firm-sizes")]);
    Ok((0..n).map(|_| law.sample(&mut rng)).collect())
}

/// Pareto quantiles `((i + 0.5) / n)^(-1 / zipf_exponent)`, largest first.
pub fn stratified_firm_sizes(n: usize, zipf_exponent: f64) -> Result<Vec<f64>> {
    if !(zipf_exponent > 0.0 && zipf_exponent.is_finite()) {
        return Err(Error::param("zipf_exponent", "must be finite and > 0"));
    }
    Ok((0..n)
        .map(|i| powf((i as f64 + 0.5) / n as f64, -1.0 / zipf_exponent))
        .collect())
}

fn normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Draw one firm's packages.
pub fn gen_packages(firm_size: f64, config: &SynthConfig, seed: u64) -> Vec<PackagePlan> {
    let mut rng = rng_from(seed, &[tag("packages")]);
    let pv = &config.package_value;
    let ex = &config.execution;
    let count = rng.random_range(config.packages_per_firm.min..=config.packages_per_firm.max);
    let location = pv.size_elasticity * ln(firm_size);
    (0..count)
        .map(|_| {
            let z = location + pv.sigma * normal(&mut rng);
            let log_n = ln(ex.base_trades) + ex.trades_elasticity * z + ex.trades_sigma * normal(&mut rng);
            let log_t =
                ln(ex.base_duration_secs) + ex.duration_elasticity * z + ex.duration_sigma * normal(&mut rng);
            let n_trades = exp(log_n).round().clamp(ex.min_trades as f64, ex.max_trades as f64) as usize;
            let duration = exp(log_t).round().clamp(1.0, ex.max_duration_secs as f64) as u64;
            PackagePlan {
                stock: rng.random_range(0..config.stocks),
                value: exp(pv.base_log_value + z),
                n_trades,
                duration,
            }
        })
        .collect()
}

/// Per-stock cursor while a firm's trades are laid out.
#[derive(Clone, Copy)]
struct Cursor {
    time: u64,
    index: usize,
    side: Option<Side>,
}

fn gap(rng: &mut Rng, mean: f64) -> u64 {
    let g: f64 = Exp::new(1.0 / mean).map_or(mean, |d| d.sample(rng));
    (g.round() as u64).max(1)
}

fn lognormal_weights(rng: &mut Rng, n: usize, sigma: f64) -> Vec<f64> {
    (0..n).map(|_| exp(sigma * normal(rng))).collect()
}

pub fn firm_id(index: usize, n_firms: usize) -> FirmId {
    let width = format!("{}", n_firms.max(1) - 1).len().max(3);
    FirmId(format!("F{index:0width$}"))
}

pub fn stock_id(index: usize, n_stocks: usize) -> StockId {
    let width = format!("{}", n_stocks.max(1) - 1).len().max(2);
    StockId(format!("S{index:0width$}"))
}

/// Lay out one firm's packages as trades. Packages in the same stock run
/// back to back with alternating sides, separated by an idle gap and, with
/// probability `churn.probability`, a churn segment.
pub fn emit_tape(
    firm: &FirmId,
    firm_size: f64,
    packages: &[PackagePlan],
    config: &SynthConfig,
    seed: u64,
) -> (Vec<Trade>, GroundTruth) {
    let mut rng = rng_from(seed, &[tag("emit")]);
    let ex = &config.execution;
    let stocks: Vec<StockId> = (0..config.stocks).map(|i| stock_id(i, config.stocks)).collect();
    let mut cursors = alloc::vec![
        Cursor {
            time: config.start_timestamp,
            index: 0,
            side: None,
        };
        config.stocks
    ];
    let typical_child = exp(config.package_value.base_log_value
        + config.package_value.size_elasticity * ln(firm_size))
        / ex.base_trades;
    let mut trades = Vec::new();
    let mut truth = GroundTruth::default();
    truth.firm_sizes.insert(firm.clone(), firm_size);
    let push = |trades: &mut Vec<Trade>, t: u64, stock: &StockId, side: Side, value: f64| {
        trades.push(Trade {
            timestamp: t,
            firm: firm.clone(),
            stock: stock.clone(),
            side,
            value,
        });
    };

    for plan in packages {
        let stock = &stocks[plan.stock];
        let cur = &mut cursors[plan.stock];
        cur.time += gap(&mut rng, ex.mean_gap_secs);

        if rng.random::<f64>() < config.churn.probability {
            let m = rng.random_range(config.churn.trades.min..=config.churn.trades.max);
            let start_index = cur.index;
            for i in 0..m {
                if i > 0 {
                    cur.time += gap(&mut rng, config.churn.mean_spacing_secs);
                }
                let side = if rng.random::<bool>() { Side::Buy } else { Side::Sell };
                let value = typical_child * exp(ex.child_value_sigma * normal(&mut rng));
                push(&mut trades, cur.time, stock, side, value);
            }
            cur.index += m;
            truth.churn.push(ChurnSegment {
                firm: firm.clone(),
                stock: stock.clone(),
                start_index,
                end_index: cur.index,
            });
            cur.time += gap(&mut rng, ex.mean_gap_secs);
        }

        let side = match cur.side {
            Some(prev) => prev.opposite(),
            None if rng.random::<bool>() => Side::Buy,
            None => Side::Sell,
        };
        cur.side = Some(side);

        let n = plan.n_trades;
        let w = lognormal_weights(&mut rng, n, ex.child_value_sigma);
        let w_sum: f64 = w.iter().sum();
        let children: Vec<f64> = w.iter().map(|&x| plan.value * x / w_sum).collect();

        let mean_child = plan.value / n as f64;
        let k = floor(config.noise_fraction * n as f64) as usize;
        let mut noise: Vec<f64> = lognormal_weights(&mut rng, k, ex.child_value_sigma)
            .into_iter()
            .map(|x| mean_child * x)
            .collect();
        let v_m_planned: f64 = children.iter().sum();
        let cap = config.noise_fraction * v_m_planned / (1.0 - config.noise_fraction);
        let noise_total: f64 = noise.iter().sum();
        if noise_total > cap {
            let s = cap / noise_total * (1.0 - 1e-9);
            noise.iter_mut().for_each(|x| *x *= s);
        }

        // First and last child pin the package span; everything else lands
        // inside it.
        let start = cur.time;
        let end = start + plan.duration;
        let mut interior: Vec<(u64, bool, f64)> = Vec::with_capacity(n - 2 + k);
        for &v in &children[1..n - 1] {
            interior.push((rng.random_range(start..=end), true, v));
        }
        for &v in &noise {
            interior.push((rng.random_range(start..=end), false, v));
        }
        interior.sort_by_key(|e| e.0);

        let start_index = cur.index;
        let mut v_m = 0.0;
        let mut noise_value = 0.0;
        let mut emit = |t: u64, dominant: bool, v: f64| {
            if dominant {
                v_m += v;
                push(&mut trades, t, stock, side, v);
            } else {
                noise_value += v;
                push(&mut trades, t, stock, side.opposite(), v);
            }
        };
        emit(start, true, children[0]);
        for &(t, dominant, v) in &interior {
            emit(t, dominant, v);
        }
        emit(end, true, children[n - 1]);
        cur.index += n + k;
        cur.time = end;

        truth.packages.push(PlantedPackage {
            firm: firm.clone(),
            stock: stock.clone(),
            side,
            start_index,
            end_index: cur.index,
            start_time: start,
            v_m,
            n_m: n,
            duration: plan.duration,
            noise_value,
            noise_trades: k,
        });
    }
    (trades, truth)
}

/// Firm sizes as configured.
pub fn firm_sizes(config: &SynthConfig) -> Result<Vec<f64>> {
    match config.size_sampling {
        SizeSampling::Iid => gen_firm_sizes(config.n_firms, config.zipf_exponent, config.seed),
        SizeSampling::Stratified => stratified_firm_sizes(config.n_firms, config.zipf_exponent),
    }
}

/// Generate one firm in isolation.
pub fn generate_firm(config: &SynthConfig, index: usize, size: f64) -> (Vec<Trade>, GroundTruth) {
    let seed = crate::rng::derive_seed(config.seed, &[tag("firm"), index as u64]);
    let firm = firm_id(index, config.n_firms);
    let plans = gen_packages(size, config, seed);
    emit_tape(&firm, size, &plans, config, seed)
}

pub fn generate(config: &SynthConfig) -> Result<SyntheticMarket> {
    config.validate()?;
    let sizes = firm_sizes(config)?;
    let mut trades = Vec::new();
    let mut truth = GroundTruth::default();
    for (i, &size) in sizes.iter().enumerate() {
        let (t, g) = generate_firm(config, i, size);
        trades.extend(t);
        truth.firm_sizes.extend(g.firm_sizes);
        truth.packages.extend(g.packages);
        truth.churn.extend(g.churn);
    }
    trades.sort_by_key(|t| t.timestamp);
    Ok(SyntheticMarket { trades, truth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::build_all_series;
    use crate::patch::{classify, cut_patches, Direction};
    use crate::segment::Segmentation;

    fn small() -> SynthConfig {
        SynthConfig {
            n_firms: 12,
            noise_fraction: 0.2,
            churn: Churn {
                probability: 0.3,
                ..Churn::default()
            },
            execution: Execution {
                max_trades: 2000,
                ..Execution::default()
            },
            seed: 42,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn deterministic() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a, b);
        let c = generate(&SynthConfig { seed: 43, ..small() }).unwrap();
        assert_ne!(a.trades, c.trades);
    }

    #[test]
    fn firm_regenerates_in_isolation() {
        let cfg = small();
        let sizes = firm_sizes(&cfg).unwrap();
        let market = generate(&cfg).unwrap();
        let (alone, _) = generate_firm(&cfg, 5, sizes[5]);
        let firm = firm_id(5, cfg.n_firms);
        let mut from_market: Vec<Trade> = market.trades.into_iter().filter(|t| t.firm == firm).collect();
        let mut alone = alone;
        alone.sort_by_key(|t| t.timestamp);
        from_market.sort_by_key(|t| t.timestamp);
        assert_eq!(alone, from_market);
    }

    #[test]
    fn truth_matches_the_tape() {
        let cfg = small();
        let market = generate(&cfg).unwrap();
        let series = build_all_series(&market.trades);
        assert!(!market.truth.packages.is_empty());
        for p in &market.truth.packages {
            let s = &series[&(p.stock.clone(), p.firm.clone())];
            let seg = &s.values[p.start_index..p.end_index];
            assert_eq!(seg.len(), p.n_m + p.noise_trades);
            assert_eq!(s.timestamps[p.start_index], p.start_time);
            assert_eq!(s.timestamps[p.end_index - 1] - p.start_time, p.duration);
            // Conservation, summed in tape order.
            let (mut dom, mut opp) = (0.0, 0.0);
            for &v in seg {
                if v * p.side.sign() > 0.0 {
                    dom += v.abs();
                } else {
                    opp += v.abs();
                }
            }
            assert_eq!(dom, p.v_m);
            assert_eq!(opp, p.noise_value);
            assert!(p.noise_value <= cfg.noise_fraction * (p.v_m + p.noise_value));
        }
        let packed: usize = market.truth.packages.iter().map(|p| p.end_index - p.start_index).sum();
        let churned: usize = market.truth.churn.iter().map(|c| c.end_index - c.start_index).sum();
        assert_eq!(packed + churned, market.trades.len());
        assert!(market.trades.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
    }

    #[test]
    fn planted_packages_are_directional() {
        for noise in [0.0, 0.2] {
            let cfg = SynthConfig {
                noise_fraction: noise,
                ..small()
            };
            let market = generate(&cfg).unwrap();
            let series = build_all_series(&market.trades);
            for p in &market.truth.packages {
                let s = &series[&(p.stock.clone(), p.firm.clone())];
                let sub = crate::market::SignedSeries {
                    firm: s.firm.clone(),
                    stock: s.stock.clone(),
                    timestamps: s.timestamps[p.start_index..p.end_index].to_vec(),
                    values: s.values[p.start_index..p.end_index].to_vec(),
                };
                let seg = Segmentation::trivial(sub.len(), 0.99);
                let patch = &cut_patches(&sub, &seg).unwrap()[0];
                let expected = match p.side {
                    Side::Buy => Direction::Buy,
                    Side::Sell => Direction::Sell,
                };
                assert_eq!(classify(patch, cfg.theta_target), expected);
                if noise == 0.0 {
                    assert_eq!(patch.n_buy.min(patch.n_sell), 0);
                }
            }
        }
    }

    #[test]
    fn zero_sigma_collapses_a_firm() {
        let cfg = SynthConfig {
            package_value: PackageValue {
                sigma: 1e-300,
                ..PackageValue::default()
            },
            ..small()
        };
        let plans = gen_packages(7.0, &cfg, 3);
        assert!(plans.len() >= 10);
        assert!(plans.iter().all(|p| (p.value - plans[0].value).abs() <= 1e-12 * p.value));
    }

    #[test]
    fn sizes() {
        let a = gen_firm_sizes(10_000, 1.0, 9).unwrap();
        assert_eq!(a, gen_firm_sizes(10_000, 1.0, 9).unwrap());
        assert!(a.iter().all(|&s| s >= 1.0));
        let z = crate::tail::hill(&a, 1000).unwrap().zeta;
        assert!((0.9..=1.1).contains(&z), "{z}");
        let one = gen_firm_sizes(1, 1.0, 9).unwrap();
        assert!(one.len() == 1 && one[0] >= 1.0);
        let st = stratified_firm_sizes(4, 1.0).unwrap();
        assert_eq!(st, alloc::vec![8.0, 8.0 / 3.0, 1.6, 8.0 / 7.0]);
        assert!(gen_firm_sizes(3, 0.0, 1).is_err());
    }

    #[test]
    fn validation() {
        assert!(SynthConfig::default().validate().is_ok());
        assert!(SynthConfig::paper_like().validate().is_ok());
        let bad = SynthConfig {
            noise_fraction: 0.25,
            ..SynthConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SynthConfig {
            package_value: PackageValue {
                sigma: 0.0,
                ..PackageValue::default()
            },
            ..SynthConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(SynthConfig::preset("nope").is_none());
        assert_eq!(firm_id(7, 600).0, "F007");
        assert_eq!(stock_id(3, 5).0, "S03");
    }
}
