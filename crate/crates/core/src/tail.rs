//! Power-law tail estimation.
//!
//! Exponents follow the CCDF convention: `P(X > x) ~ x^-zeta`, so the
//! density decays as `x^-(zeta + 1)`.

use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::math::{abs, floor, ln, powf, quantile_sorted, sqrt};
use crate::rng::rng_from;

const Z_975: f64 = 1.959_963_984_540_054;

pub const MIN_AUTO_SAMPLE: usize = 50;
pub const MIN_AUTO_K: usize = 10;
pub const DEFAULT_FRACTION: f64 = 0.1;

/// Hill estimate from the `k` largest order statistics.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct HillFit {
    pub zeta: f64,
    pub ci95: (f64, f64),
    pub k: usize,
    /// The threshold order statistic `x_(k+1)`.
    pub x_k: f64,
    pub n: usize,
}

/// How many order statistics enter the tail.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "kebab-case"))]
pub enum KPolicy {
    /// Minimize the KS distance between the tail and the fitted Pareto.
    #[default]
    Auto,
    Fraction(f64),
    Fixed(usize),
}

fn sorted_desc(xs: &[f64]) -> Result<Vec<f64>> {
    if let Some((index, &value)) = xs.iter().enumerate().find(|(_, &x)| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::NonPositive { index, value });
    }
    let mut s = xs.to_vec();
    s.sort_unstable_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// `zeta = k / sum_{i<=k} ln(x_(i) / x_(k+1))` on a descending sample.
fn hill_sorted(desc: &[f64], k: usize) -> Result<HillFit> {
    let n = desc.len();
    if k == 0 || k >= n {
        return Err(Error::param("k", alloc::format!("need 1 <= k < n = {n}, got {k}")));
    }
    let x_k = desc[k];
    let sum: f64 = desc[..k].iter().map(|&x| ln(x / x_k)).sum();
    if !(sum > 0.0) {
        return Err(Error::degenerate("top order statistics are all tied"));
    }
    let zeta = k as f64 / sum;
    let half = Z_975 / sqrt(k as f64);
    Ok(HillFit {
        zeta,
        ci95: (zeta * (1.0 - half), zeta * (1.0 + half)),
        k,
        x_k,
        n,
    })
}

pub fn hill(xs: &[f64], k: usize) -> Result<HillFit> {
    hill_sorted(&sorted_desc(xs)?, k)
}

/// KS distance between the `k` top points and the Pareto fitted above
/// `desc[k]`, given the Hill exponent.
fn ks_distance(desc: &[f64], k: usize, zeta: f64) -> f64 {
    let x_min = desc[k];
    let kf = k as f64;
    // Ascending tail: desc[k-1], ..., desc[0].
    (0..k)
        .map(|j| {
            let y = desc[k - 1 - j];
            let model = 1.0 - powf(y / x_min, -zeta);
            let hi = (j + 1) as f64 / kf;
            let lo = j as f64 / kf;
            abs(hi - model).max(abs(lo - model))
        })
        .fold(0.0, f64::max)
}

fn choose_k_sorted(desc: &[f64]) -> Result<usize> {
    let n = desc.len();
    if n < MIN_AUTO_SAMPLE {
        return Err(Error::TooFewPoints {
            needed: MIN_AUTO_SAMPLE,
            got: n,
        });
    }
    // Running sum of ln x over the top k.
    let logs: Vec<f64> = desc.iter().map(|&x| ln(x)).collect();
    let mut acc = logs[..MIN_AUTO_K - 1].iter().sum::<f64>();
    let mut best: Option<(f64, usize)> = None;
    for k in MIN_AUTO_K..=n / 2 {
        acc += logs[k - 1];
        let sum = acc - k as f64 * logs[k];
        if !(sum > 0.0) {
            continue;
        }
        let d = ks_distance(desc, k, k as f64 / sum);
        if best.is_none_or(|(b, _)| d < b) {
            best = Some((d, k));
        }
    }
    best.map(|(_, k)| k)
        .ok_or_else(|| Error::degenerate("no admissible tail cutoff"))
}

/// Tail size minimizing the KS distance over `k in [10, n/2]`.
pub fn choose_k(xs: &[f64]) -> Result<usize> {
    choose_k_sorted(&sorted_desc(xs)?)
}

pub fn resolve_k(policy: KPolicy, xs: &[f64]) -> Result<usize> {
    match policy {
        KPolicy::Auto => choose_k(xs),
        KPolicy::Fraction(f) => {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::param("k", "fraction must lie in (0, 1)"));
            }
            Ok((floor(f * xs.len() as f64) as usize).max(1))
        }
        KPolicy::Fixed(k) => Ok(k),
    }
}

/// Hill fit with the tail size picked by `policy`.
pub fn fit_tail(xs: &[f64], policy: KPolicy) -> Result<HillFit> {
    let desc = sorted_desc(xs)?;
    let k = match policy {
        KPolicy::Auto => choose_k_sorted(&desc)?,
        other => resolve_k(other, xs)?,
    };
    hill_sorted(&desc, k)
}

/// Percentile bootstrap interval for the Hill exponent at fixed `k`.
pub fn hill_bootstrap_ci(xs: &[f64], k: usize, resamples: usize, seed: u64) -> Result<(f64, f64)> {
    sorted_desc(xs)?;
    let n = xs.len();
    let mut rng = rng_from(seed, &[crate::rng::tag("hill-bootstrap")]);
    let mut buf = Vec::with_capacity(n);
    let mut estimates = Vec::with_capacity(resamples);
    let mut failed = 0;
    for _ in 0..resamples {
        buf.clear();
        buf.extend((0..n).map(|_| xs[rng.random_range(0..n)]));
        buf.sort_unstable_by(|a, b| b.total_cmp(a));
        match hill_sorted(&buf, k) {
            Ok(fit) => estimates.push(fit.zeta),
            Err(_) => failed += 1,
        }
    }
    if failed * 100 > resamples || estimates.is_empty() {
        return Err(Error::BootstrapFailure {
            failed,
            total: resamples,
        });
    }
    estimates.sort_unstable_by(f64::total_cmp);
    Ok((
        quantile_sorted(&estimates, 0.025),
        quantile_sorted(&estimates, 0.975),
    ))
}

/// Empirical `P(X >= x)` at each distinct sample value, ascending.
pub fn ccdf(xs: &[f64]) -> Result<Vec<(f64, f64)>> {
    if xs.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    let mut s = xs.to_vec();
    s.sort_unstable_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut out = Vec::new();
    let mut i = 0;
    while i < s.len() {
        let x = s[i];
        out.push((x, (s.len() - i) as f64 / n));
        while i < s.len() && s[i] == x {
            i += 1;
        }
    }
    Ok(out)
}
