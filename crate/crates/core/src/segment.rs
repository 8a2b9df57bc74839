//! Recursive maximum-t segmentation of a signed series.
//!
//! A window is cut at the position maximizing the two-sample t statistic
//! between its left and right parts when that maximum is significant and the
//! two new pieces also differ significantly from the segments adjacent to
//! them. Pieces are then processed the same way until no cut survives.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::market::SignedSeries;
use crate::math::{abs, ln, powf, sqrt};
use crate::rng::{rng_from, tag};
use crate::special::beta_reg;

/// Shape exponent of the max-t null approximation.
pub const DELTA: f64 = 0.40;
/// `eta(n) = ETA_SLOPE * ln n + ETA_INTERCEPT`.
pub const ETA_SLOPE: f64 = 4.19;
pub const ETA_INTERCEPT: f64 = -11.54;

/// Smallest admissible window: two points on each side of the pointer.
pub const MIN_WINDOW: usize = 4;

/// Relative tolerance under which a standard error or mean gap counts as zero.
const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "kebab-case"))]
pub enum TStatistic {
    /// Student t with pooled variance.
    #[default]
    Pooled,
    /// Welch's unequal-variance t. The closed form is calibrated for the
    /// pooled statistic, so Welch requires [`SignificanceMode::MonteCarlo`].
    Welch,
}

impl TStatistic {
    /// Fewest points either side of an admissible split. Welch estimates each
    /// side's variance separately, and two-point sides make its null maximum
    /// too heavy-tailed to detect anything.
    pub fn min_side(self) -> usize {
        match self {
            TStatistic::Pooled => 2,
            TStatistic::Welch => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "kebab-case"))]
pub enum SignificanceMode {
    /// Closed-form approximation, with Monte Carlo tables for windows shorter
    /// than [`SegmenterConfig::small_sample_cutoff`].
    #[default]
    ClosedForm,
    /// Monte Carlo null distribution for every window length.
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SegmenterConfig {
    pub threshold: f64,
    pub statistic: TStatistic,
    pub mode: SignificanceMode,
    /// Trials per window length in Monte Carlo mode.
    pub mc_trials: usize,
    /// Trials per length for the small-window tables used in closed-form mode.
    pub small_sample_trials: usize,
    pub small_sample_cutoff: usize,
    pub seed: u64,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        SegmenterConfig {
            threshold: 0.99,
            statistic: TStatistic::Pooled,
            mode: SignificanceMode::ClosedForm,
            mc_trials: 1000,
            small_sample_trials: 20_000,
            small_sample_cutoff: 20,
            seed: 0,
        }
    }
}

/// Best split of a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutCandidate {
    /// Left part is `[lo, position)`, right part `[position, hi)`.
    pub position: usize,
    pub t_value: f64,
    pub significance: f64,
}

/// Boundaries `0 = b_0 < b_1 < ... < b_m = len`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Segmentation {
    pub boundaries: Vec<usize>,
    pub threshold: f64,
}

impl Segmentation {
    pub fn trivial(len: usize, threshold: f64) -> Self {
        let boundaries = if len == 0 { vec![0] } else { vec![0, len] };
        Segmentation {
            boundaries,
            threshold,
        }
    }

    pub fn n_cuts(&self) -> usize {
        self.boundaries.len().saturating_sub(2)
    }

    pub fn segments(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.boundaries.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn validate(&self, len: usize) -> Result<()> {
        let ok = match self.boundaries.as_slice() {
            [0] => len == 0,
            [0, .., last] => *last == len && self.boundaries.windows(2).all(|w| w[0] < w[1]),
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(
                "boundaries",
                alloc::format!("not a partition of 0..{len}"),
            ))
        }
    }
}

/// Degenerate-aware ratio of a mean gap to its standard error.
#[inline]
fn ratio(diff: f64, se: f64, scale: f64) -> f64 {
    let tol = ZERO_TOL * scale;
    if se <= tol || !se.is_finite() {
        if abs(diff) <= tol {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        abs(diff) / se
    }
}

#[inline]
fn t_from_moments(
    kind: TStatistic,
    n_left: f64,
    n_right: f64,
    diff: f64,
    ss_left: f64,
    ss_right: f64,
    scale: f64,
) -> f64 {
    let se = match kind {
        TStatistic::Pooled => {
            let var = (ss_left + ss_right) / (n_left + n_right - 2.0);
            sqrt(var * (1.0 / n_left + 1.0 / n_right))
        }
        TStatistic::Welch => sqrt(
            ss_left / (n_left - 1.0) / n_left + ss_right / (n_right - 1.0) / n_right,
        ),
    };
    ratio(diff, se, scale)
}

fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0_f64, |m, &x| m.max(abs(x)))
}

/// Two-sample t between adjacent ranges, computed in two passes.
pub fn two_sample_t(left: &[f64], right: &[f64], kind: TStatistic) -> Result<f64> {
    if left.len() < 2 || right.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: left.len().min(right.len()),
        });
    }
    let moments = |xs: &[f64]| {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let ss = xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>();
        (mean, ss)
    };
    let (m_l, ss_l) = moments(left);
    let (m_r, ss_r) = moments(right);
    let scale = max_abs(left).max(max_abs(right));
    Ok(t_from_moments(
        kind,
        left.len() as f64,
        right.len() as f64,
        m_l - m_r,
        ss_l,
        ss_r,
        scale,
    ))
}

/// Pooled-variance t between `values[..split]` and `values[split..]`.
pub fn t_statistic(values: &[f64], split: usize) -> Result<f64> {
    if split > values.len() {
        return Err(Error::param("split", "beyond the end of the series"));
    }
    two_sample_t(&values[..split], &values[split..], TStatistic::Pooled)
}

/// Scan every admissible split with prefix sums; `None` for windows too short
/// to split (see [`TStatistic::min_side`]). Ties go to the smallest position.
pub fn scan_max_t(values: &[f64], kind: TStatistic) -> Option<(usize, f64)> {
    let mut scratch = Vec::new();
    scan_with(values, kind, &mut scratch)
}

fn scan_with(values: &[f64], kind: TStatistic, prefix: &mut Vec<(f64, f64)>) -> Option<(usize, f64)> {
    let n = values.len();
    let side = kind.min_side();
    if n < MIN_WINDOW.max(2 * side) {
        return None;
    }
    // Centering keeps the sum-of-squares subtraction well conditioned.
    let mean = values.iter().sum::<f64>() / n as f64;
    let scale = max_abs(values);
    prefix.clear();
    prefix.reserve(n + 1);
    let (mut s1, mut s2) = (0.0, 0.0);
    prefix.push((0.0, 0.0));
    for &x in values {
        let c = x - mean;
        s1 += c;
        s2 += c * c;
        prefix.push((s1, s2));
    }
    let (tot1, tot2) = prefix[n];

    let mut best = (side, -1.0);
    for p in side..=n - side {
        let (l1, l2) = prefix[p];
        let (n_l, n_r) = (p as f64, (n - p) as f64);
        let (r1, r2) = (tot1 - l1, tot2 - l2);
        let ss_l = (l2 - l1 * l1 / n_l).max(0.0);
        let ss_r = (r2 - r1 * r1 / n_r).max(0.0);
        let t = t_from_moments(kind, n_l, n_r, l1 / n_l - r1 / n_r, ss_l, ss_r, scale);
        if t > best.1 {
            best = (p, t);
            if t == f64::INFINITY {
                break;
            }
        }
    }
    Some(best)
}

/// Pooled max-t scan returning the candidate with closed-form significance.
pub fn max_t(values: &[f64]) -> Option<CutCandidate> {
    scan_max_t(values, TStatistic::Pooled).map(|(position, t_value)| CutCandidate {
        position,
        t_value,
        significance: significance(t_value, values.len()),
    })
}

/// Closed-form probability that an i.i.d. sequence of length `n` has a
/// maximum t no larger than `t_max`.
pub fn significance(t_max: f64, n: usize) -> f64 {
    if !(t_max > 0.0) {
        return 0.0;
    }
    if t_max == f64::INFINITY {
        return 1.0;
    }
    let n = n as f64;
    let nu = n - 2.0;
    let eta = ETA_SLOPE * ln(n) + ETA_INTERCEPT;
    let x = nu / (nu + t_max * t_max);
    let p = powf(1.0 - beta_reg(DELTA * nu, DELTA, x), eta);
    if p.is_nan() {
        return 1.0;
    }
    p.clamp(0.0, 1.0)
}

/// Sorted max-t values of `trials` standard-normal sequences of length `n`.
pub fn null_max_t_sample(n: usize, trials: usize, seed: u64, kind: TStatistic) -> Vec<f64> {
    let mut rng = rng_from(seed, &[tag("null-max-t"), n as u64, kind as u64]);
    let mut buf = vec![0.0; n];
    let mut scratch = Vec::with_capacity(n + 1);
    let mut out: Vec<f64> = (0..trials)
        .map(|_| {
            for x in buf.iter_mut() {
                *x = StandardNormal.sample(&mut rng);
            }
            scan_with(&buf, kind, &mut scratch).map_or(0.0, |(_, t)| t)
        })
        .collect();
    out.sort_unstable_by(f64::total_cmp);
    out
}

fn fraction_at_most(sorted: &[f64], t: f64) -> f64 {
    sorted.partition_point(|&x| x <= t) as f64 / sorted.len() as f64
}

/// Empirical fraction of `trials` standard-normal sequences of length `n`
/// whose maximum pooled t is at most `t_max`.
pub fn significance_mc(t_max: f64, n: usize, trials: usize, seed: u64) -> f64 {
    let trials = trials.max(1);
    if n < MIN_WINDOW {
        return 1.0;
    }
    fraction_at_most(&null_max_t_sample(n, trials, seed, TStatistic::Pooled), t_max)
}

/// Segmenter with precomputed null tables for short windows.
#[derive(Debug, Clone)]
pub struct Segmenter {
    config: SegmenterConfig,
    /// `small_tables[n]` holds the sorted null sample for window length `n`.
    small_tables: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy)]
struct Window {
    lo: usize,
    hi: usize,
    /// Start of the segment adjacent on the left, if any.
    left: Option<usize>,
    /// End of the segment adjacent on the right, if any.
    right: Option<usize>,
}

impl Segmenter {
    pub fn new(config: SegmenterConfig) -> Result<Self> {
        if !(config.threshold > 0.0 && config.threshold < 1.0) {
            return Err(Error::param("threshold", "must lie in (0, 1)"));
        }
        if config.statistic == TStatistic::Welch && config.mode == SignificanceMode::ClosedForm {
            return Err(Error::param(
                "statistic",
                "the closed-form significance is calibrated for pooled t; use Monte Carlo mode with Welch",
            ));
        }
        if config.mc_trials == 0 || config.small_sample_trials == 0 {
            return Err(Error::param("mc_trials", "must be at least 1"));
        }
        let cutoff = config.small_sample_cutoff.max(MIN_WINDOW);
        let mut small_tables = vec![Vec::new(); cutoff];
        let trials = match config.mode {
            SignificanceMode::ClosedForm => config.small_sample_trials,
            SignificanceMode::MonteCarlo => config.mc_trials,
        };
        for (n, table) in small_tables.iter_mut().enumerate().skip(MIN_WINDOW) {
            *table = null_max_t_sample(n, trials, config.seed, config.statistic);
        }
        Ok(Segmenter {
            config,
            small_tables,
        })
    }

    pub fn config(&self) -> &SegmenterConfig {
        &self.config
    }

    fn significance_of(&self, t: f64, n: usize, cache: &mut BTreeMap<usize, Vec<f64>>) -> f64 {
        if n < MIN_WINDOW {
            return 0.0;
        }
        if let Some(table) = self.small_tables.get(n) {
            return fraction_at_most(table, t);
        }
        match self.config.mode {
            SignificanceMode::ClosedForm => significance(t, n),
            SignificanceMode::MonteCarlo => {
                let table = cache.entry(n).or_insert_with(|| {
                    null_max_t_sample(n, self.config.mc_trials, self.config.seed, self.config.statistic)
                });
                fraction_at_most(table, t)
            }
        }
    }

    /// Best cut of `values` with significance under this configuration.
    pub fn max_t(&self, values: &[f64]) -> Option<CutCandidate> {
        let (position, t_value) = scan_max_t(values, self.config.statistic)?;
        let significance = self.significance_of(t_value, values.len(), &mut BTreeMap::new());
        Some(CutCandidate {
            position,
            t_value,
            significance,
        })
    }

    pub fn segment_values(&self, values: &[f64]) -> Segmentation {
        let n = values.len();
        let thr = self.config.threshold;
        let kind = self.config.statistic;
        let mut cache = BTreeMap::new();
        let mut scratch = Vec::new();
        let mut cuts = Vec::new();
        let mut stack = vec![Window {
            lo: 0,
            hi: n,
            left: None,
            right: None,
        }];
        while let Some(w) = stack.pop() {
            let Some((rel, t)) = scan_with(&values[w.lo..w.hi], kind, &mut scratch) else {
                continue;
            };
            let p = w.lo + rel;
            if self.significance_of(t, w.hi - w.lo, &mut cache) < thr {
                continue;
            }
            // Each side holds at least two points, so these never fail.
            if let Some(ll) = w.left {
                let t_left = two_sample_t(&values[ll..w.lo], &values[w.lo..p], kind)
                    .expect("segments hold two or more points");
                if self.significance_of(t_left, p - ll, &mut cache) < thr {
                    continue;
                }
            }
            if let Some(rr) = w.right {
                let t_right = two_sample_t(&values[p..w.hi], &values[w.hi..rr], kind)
                    .expect("segments hold two or more points");
                if self.significance_of(t_right, rr - p, &mut cache) < thr {
                    continue;
                }
            }
            cuts.push(p);
            stack.push(Window {
                lo: p,
                hi: w.hi,
                left: Some(w.lo),
                right: w.right,
            });
            stack.push(Window {
                lo: w.lo,
                hi: p,
                left: w.left,
                right: Some(w.hi),
            });
        }
        cuts.sort_unstable();
        let mut seg = Segmentation::trivial(n, thr);
        if !cuts.is_empty() {
            seg.boundaries = core::iter::once(0).chain(cuts).chain(core::iter::once(n)).collect();
        }
        seg
    }

    pub fn segment(&self, series: &SignedSeries) -> Segmentation {
        self.segment_values(&series.values)
    }
}

/// Segment with default settings at the given significance threshold.
pub fn segment(series: &SignedSeries, threshold: f64) -> Result<Segmentation> {
    let seg = Segmenter::new(SegmenterConfig {
        threshold,
        ..SegmenterConfig::default()
    })?;
    Ok(seg.segment(series))
}
