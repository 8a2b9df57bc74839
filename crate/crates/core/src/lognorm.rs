//! Jarque-Bera normality test and the per-firm lognormality summary.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::market::FirmId;
use crate::math::{ln, quantile_sorted};
use crate::patch::{DirectionalPatch, Variable};
use crate::rng::{rng_from, tag};

/// 95% quantile of chi-squared with two degrees of freedom, `2 ln 20`.
pub const CHI2_2_95: f64 = 5.991_464_547_107_979;
pub const MIN_SAMPLE: usize = 8;
/// Sample sizes below this use the Monte Carlo table.
pub const SMALL_SAMPLE_LIMIT: usize = 50;

/// Seed and trial count behind [`SMALL_SAMPLE_CRITICAL`].
pub const TABLE_SEED: u64 = 20_010_101;
pub const TABLE_TRIALS: usize = 1_000_000;

/// 95% critical values of JB under normality for `n = 8..=49`, from
/// [`critical_value_mc`] with [`TABLE_SEED`] and [`TABLE_TRIALS`].
pub const SMALL_SAMPLE_CRITICAL: [f64; SMALL_SAMPLE_LIMIT - MIN_SAMPLE] = [
    2.0896, 2.3084, 2.5167, 2.7088, 2.8869, 3.0274,
    3.1632, 3.2999, 3.4113, 3.5234, 3.6194, 3.7140,
    3.7968, 3.9027, 3.9552, 4.0284, 4.0867, 4.1446,
    4.1898, 4.2644, 4.3066, 4.3796, 4.3927, 4.4398,
    4.4875, 4.5130, 4.5719, 4.6100, 4.6498, 4.6420,
    4.7054, 4.7204, 4.7501, 4.7558, 4.8133, 4.8456,
    4.8541, 4.8884, 4.9013, 4.9246, 4.9360, 4.9575,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "kebab-case"))]
pub enum CriticalValues {
    /// Monte Carlo table below 50 observations, chi-squared(2) above.
    #[default]
    SmallSample,
    /// Chi-squared(2) everywhere.
    Asymptotic,
}

impl CriticalValues {
    pub fn at(self, n: usize) -> f64 {
        match self {
            CriticalValues::SmallSample if (MIN_SAMPLE..SMALL_SAMPLE_LIMIT).contains(&n) => {
                SMALL_SAMPLE_CRITICAL[n - MIN_SAMPLE]
            }
            _ => CHI2_2_95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct JarqueBera {
    pub n: usize,
    pub skewness: f64,
    /// Raw (non-excess) kurtosis.
    pub kurtosis: f64,
    pub jb_stat: f64,
    pub critical_value: f64,
    pub reject: bool,
}

/// `JB = n/6 (S^2 + (K - 3)^2 / 4)` from biased central moments.
pub fn jb_statistic(xs: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let scale = xs.iter().fold(0.0_f64, |m, &x| m.max(crate::math::abs(x)));
    if !(m2 > 1e-24 * scale * scale) || !(m2 > 0.0) {
        return Err(Error::degenerate("zero variance"));
    }
    let skew = m3 / (m2 * crate::math::sqrt(m2));
    let kurt = m4 / (m2 * m2);
    let jb = n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
    Ok((jb, skew, kurt))
}

pub fn jarque_bera_with(xs: &[f64], critical: CriticalValues) -> Result<JarqueBera> {
    if xs.len() < MIN_SAMPLE {
        return Err(Error::TooFewPoints {
            needed: MIN_SAMPLE,
            got: xs.len(),
        });
    }
    let (jb_stat, skewness, kurtosis) = jb_statistic(xs)?;
    let critical_value = critical.at(xs.len());
    Ok(JarqueBera {
        n: xs.len(),
        skewness,
        kurtosis,
        jb_stat,
        critical_value,
        reject: jb_stat > critical_value,
    })
}

/// Jarque-Bera at the 95% level with small-sample critical values.
pub fn jarque_bera(xs: &[f64]) -> Result<JarqueBera> {
    jarque_bera_with(xs, CriticalValues::SmallSample)
}

/// 95% quantile of JB over `trials` standard-normal samples of size `n`.
pub fn critical_value_mc(n: usize, trials: usize, seed: u64) -> f64 {
    let mut rng = rng_from(seed, &[tag("jb-critical"), n as u64]);
    let mut buf = alloc::vec![0.0; n];
    let mut stats: Vec<f64> = (0..trials)
        .map(|_| {
            buf.iter_mut().for_each(|x| *x = StandardNormal.sample(&mut rng));
            jb_statistic(&buf).map_or(0.0, |r| r.0)
        })
        .collect();
    stats.sort_unstable_by(f64::total_cmp);
    quantile_sorted(&stats, 0.95)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LognormalityResult {
    pub firm: FirmId,
    pub variable: Variable,
    pub n: usize,
    pub jb_stat: f64,
    pub critical_value: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LognormalitySummary {
    pub variable: Variable,
    pub tested: usize,
    pub non_rejecting: usize,
    /// Share of tested firms not rejecting, in percent.
    pub percentage: f64,
    pub results: Vec<LognormalityResult>,
}

/// Positive values of `var`, dropping zero durations.
pub fn positive_values(patches: &[DirectionalPatch], var: Variable) -> Vec<f64> {
    patches
        .iter()
        .map(|p| p.get(var))
        .filter(|&x| x > 0.0)
        .collect()
}

/// Jarque-Bera on `ln x`.
pub fn lognormality(xs: &[f64], critical: CriticalValues) -> Result<JarqueBera> {
    if let Some((index, &value)) = xs.iter().enumerate().find(|(_, &x)| !(x > 0.0)) {
        return Err(Error::NonPositive { index, value });
    }
    let logs: Vec<f64> = xs.iter().map(|&x| ln(x)).collect();
    jarque_bera_with(&logs, critical)
}

/// Test lognormality of `var` within each firm holding at least
/// `min_patches` usable patches.
pub fn per_firm_lognormality(
    groups: &BTreeMap<FirmId, Vec<DirectionalPatch>>,
    var: Variable,
    min_patches: usize,
    critical: CriticalValues,
) -> Result<LognormalitySummary> {
    let min_patches = min_patches.max(MIN_SAMPLE);
    let mut results = Vec::new();
    for (firm, patches) in groups {
        let xs = positive_values(patches, var);
        if xs.len() < min_patches {
            continue;
        }
        // A firm whose variable never varies (e.g. constant N_m) cannot be
        // lognormal in any useful sense; count it as a rejection.
        let (jb_stat, critical_value, reject) = match lognormality(&xs, critical) {
            Ok(r) => (r.jb_stat, r.critical_value, r.reject),
            Err(Error::Degenerate(_)) => (f64::INFINITY, critical.at(xs.len()), true),
            Err(e) => return Err(e),
        };
        results.push(LognormalityResult {
            firm: firm.clone(),
            variable: var,
            n: xs.len(),
            jb_stat,
            critical_value,
            reject,
        });
    }
    if results.is_empty() {
        return Err(Error::degenerate(alloc::format!(
            "no firm has {min_patches} or more patches"
        )));
    }
    let non_rejecting = results.iter().filter(|r| !r.reject).count();
    Ok(LognormalitySummary {
        variable: var,
        tested: results.len(),
        non_rejecting,
        percentage: 100.0 * non_rejecting as f64 / results.len() as f64,
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;
    use alloc::vec;
    use rand_distr::Exp1;
    extern crate std;
    use std::println;

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng_from(seed, &[]);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn symmetric_sample_with_normal_kurtosis() {
        // +-sqrt(3) with weight 1/6 each, 0 with weight 2/3: S = 0, K = 3.
        let a = 3.0_f64.sqrt();
        let xs = [a, -a, 0.0, 0.0, 0.0, 0.0];
        let (jb, s, k) = jb_statistic(&xs).unwrap();
        assert!(s.abs() < 1e-15);
        assert!((k - 3.0).abs() < 1e-12);
        assert!(jb.abs() < 1e-12);
    }

    #[test]
    fn known_value() {
        // Deviations +-1.5, +-0.5: m2 = 1.25, S = 0.
        let xs = [1.0, 2.0, 3.0, 4.0];
        let (jb, s, k) = jb_statistic(&xs).unwrap();
        assert_eq!(s, 0.0);
        let k_ref = (2.0 * 1.5_f64.powi(4) + 2.0 * 0.5_f64.powi(4)) / 4.0 / 1.25_f64.powi(2);
        assert!((k - k_ref).abs() < 1e-12);
        assert!((jb - 4.0 / 6.0 * 0.25 * (k_ref - 3.0).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn location_scale_invariance() {
        let xs = normals(200, 3);
        let ys: Vec<f64> = xs.iter().map(|x| 1e3 + 17.0 * x).collect();
        let a = jarque_bera(&xs).unwrap();
        let b = jarque_bera(&ys).unwrap();
        assert!((a.jb_stat - b.jb_stat).abs() < 1e-8 * a.jb_stat.max(1.0));
    }

    #[test]
    fn degenerate_and_short_inputs() {
        assert!(matches!(jb_statistic(&[2.0; 10]), Err(Error::Degenerate(_))));
        assert!(matches!(jarque_bera(&[1.0; 3]), Err(Error::TooFewPoints { .. })));
        assert!(matches!(
            lognormality(&[1.0, 0.0, 2.0], CriticalValues::SmallSample),
            Err(Error::NonPositive { index: 1, .. })
        ));
    }

    #[test]
    fn table_is_monotone_and_below_asymptote() {
        for w in SMALL_SAMPLE_CRITICAL.windows(2) {
            assert!(w[1] > w[0] - 0.02);
        }
        assert!(SMALL_SAMPLE_CRITICAL.iter().all(|&c| c < CHI2_2_95));
        assert_eq!(CriticalValues::SmallSample.at(8), SMALL_SAMPLE_CRITICAL[0]);
        assert_eq!(CriticalValues::SmallSample.at(50), CHI2_2_95);
        assert_eq!(CriticalValues::Asymptotic.at(10), CHI2_2_95);
    }

    #[test]
    fn table_spot_check() {
        for n in [8, 20, 49] {
            let c = critical_value_mc(n, 100_000, 7);
            let t = SMALL_SAMPLE_CRITICAL[n - MIN_SAMPLE];
            assert!((c - t).abs() < 0.06 * t, "n={n}: {c} vs {t}");
        }
    }

    #[test]
    fn lognormal_accepted_exponential_rejected() {
        let mut rng = rng_from(11, &[]);
        let mut rejected = 0;
        for _ in 0..200 {
            let xs: Vec<f64> = (0..500).map(|_| Exp1.sample(&mut rng)).collect();
            if jarque_bera(&xs).unwrap().reject {
                rejected += 1;
            }
        }
        assert_eq!(rejected, 200);
        let mut accepted = 0;
        for s in 0..200 {
            let xs: Vec<f64> = normals(30, 1000 + s).iter().map(|&z| crate::math::exp(z)).collect();
            if !lognormality(&xs, CriticalValues::SmallSample).unwrap().reject {
                accepted += 1;
            }
        }
        assert!((180..=198).contains(&accepted), "{accepted}");
    }

    #[test]
    fn per_firm_summary() {
        use crate::market::Side;
        use crate::patch::Patch;
        let mk = |firm: &str, n: usize, value: f64| DirectionalPatch {
            patch: Patch {
                firm: firm.into(),
                stock: "S".into(),
                start: 0,
                end: n,
                v_buy: value,
                v_sell: 0.0,
                v_total: value,
                n_buy: n,
                n_sell: 0,
                t_first: 0,
                t_last: 10,
            },
            side: Side::Buy,
            duration: 10,
            n_trades: n,
            value,
        };
        let mut groups = BTreeMap::new();
        let zs = normals(40, 5);
        groups.insert(
            FirmId::from("A"),
            zs.iter().map(|&z| mk("A", 12, crate::math::exp(z))).collect::<Vec<_>>(),
        );
        groups.insert(FirmId::from("B"), vec![mk("B", 12, 1.0); 3]);
        let sum = per_firm_lognormality(&groups, Variable::Value, 10, CriticalValues::SmallSample).unwrap();
        assert_eq!(sum.tested, 1);
        // Constant N_m in A is degenerate and counts as a rejection.
        let sum = per_firm_lognormality(&groups, Variable::Trades, 10, CriticalValues::SmallSample).unwrap();
        assert_eq!((sum.tested, sum.non_rejecting, sum.percentage), (1, 0, 0.0));
        assert!(per_firm_lognormality(&groups, Variable::Value, 100, CriticalValues::SmallSample).is_err());
    }

    #[test]
    #[ignore = "regenerates SMALL_SAMPLE_CRITICAL; slow"]
    fn regenerate_table() {
        let vals: Vec<f64> = (MIN_SAMPLE..SMALL_SAMPLE_LIMIT)
            .map(|n| critical_value_mc(n, TABLE_TRIALS, TABLE_SEED))
            .collect();
        println!("{vals:?}");
    }
}
