//! Allometric exponents from principal axes in log space.
//!
//! `N_m ~ V_m^g1`, `T ~ V_m^g2` and `N_m ~ T^g3` are read off the leading
//! eigenvector of the covariance matrix of the log-transformed variables,
//! either pairwise (bivariate) or jointly on `(ln T, ln N_m, ln V_m)`
//! (trivariate, where `g1 = g2 * g3` holds identically).

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::market::FirmId;
use crate::math::{abs, ln, quantile_sorted, sqrt};
use crate::patch::DirectionalPatch;
use crate::rng::{rng_from, tag};

pub const DEFAULT_BOOTSTRAP: usize = 1000;
pub const MIN_BOOTSTRAP: usize = 200;
pub const DEFAULT_MIN_FIRM_PATCHES: usize = 10;

/// Natural logs of `(T, N_m, V_m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LogPoint {
    pub log_t: f64,
    pub log_n: f64,
    pub log_v: f64,
}

/// The three variable pairs of the bivariate analysis, as `(u, v)` with
/// slope `dv/du`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Relation {
    /// `N_m ~ V_m^g1`
    G1,
    /// `T ~ V_m^g2`
    G2,
    /// `N_m ~ T^g3`
    G3,
}

impl Relation {
    pub const ALL: [Relation; 3] = [Relation::G1, Relation::G2, Relation::G3];

    pub fn project(self, p: &LogPoint) -> (f64, f64) {
        match self {
            Relation::G1 => (p.log_v, p.log_n),
            Relation::G2 => (p.log_v, p.log_t),
            Relation::G3 => (p.log_t, p.log_n),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Relation::G1 => "g1",
            Relation::G2 => "g2",
            Relation::G3 => "g3",
        }
    }

    /// Axis labels `(x, y)`.
    pub fn axes(self) -> (&'static str, &'static str) {
        match self {
            Relation::G1 => ("V_m", "N_m"),
            Relation::G2 => ("V_m", "T"),
            Relation::G3 => ("T", "N_m"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "lowercase"))]
pub enum Mode {
    Bi,
    Tri,
}

/// Exponents with optional bootstrap intervals.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct AllometricFit {
    pub mode: Mode,
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    pub ci95: Option<[(f64, f64); 3]>,
    /// Bivariate: share of the leading eigenvalue per relation (g1, g2, g3).
    /// Trivariate: a single share.
    pub explained_variance: Vec<f64>,
    pub n_points: usize,
}

impl AllometricFit {
    pub fn exponents(&self) -> [f64; 3] {
        [self.g1, self.g2, self.g3]
    }
}

/// Log points of the patches; zero-duration patches are skipped and counted.
pub fn log_points(patches: &[DirectionalPatch]) -> (Vec<LogPoint>, usize) {
    let mut skipped = 0;
    let pts = patches
        .iter()
        .filter_map(|p| {
            if p.duration == 0 || p.n_trades == 0 || !(p.value > 0.0) {
                skipped += 1;
                return None;
            }
            Some(LogPoint {
                log_t: ln(p.duration as f64),
                log_n: ln(p.n_trades as f64),
                log_v: ln(p.value),
            })
        })
        .collect();
    (pts, skipped)
}

// ---------------------------------------------------------------------------
// Covariance and eigen-decomposition

fn covariance2(points: &[(f64, f64)]) -> [f64; 3] {
    let n = points.len() as f64;
    let (mu, mv) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(u, v)| (a + u, b + v));
    let (mu, mv) = (mu / n, mv / n);
    let mut c = [0.0; 3];
    for &(u, v) in points {
        let (du, dv) = (u - mu, v - mv);
        c[0] += du * du;
        c[1] += du * dv;
        c[2] += dv * dv;
    }
    let d = n - 1.0;
    [c[0] / d, c[1] / d, c[2] / d]
}

/// Leading eigenpair of `[[a, b], [b, c]]` with the eigenvector oriented so
/// its first component is non-negative, plus the second eigenvalue.
fn eigen2(a: f64, b: f64, c: f64) -> ((f64, f64), f64, f64) {
    let mid = 0.5 * (a + c);
    let rad = sqrt(0.25 * (a - c) * (a - c) + b * b);
    let (l1, l2) = (mid + rad, mid - rad);
    // Of the two equivalent eigenvector forms, take the better conditioned.
    let v = if abs(l1 - c) >= abs(l1 - a) {
        (l1 - c, b)
    } else {
        (b, l1 - a)
    };
    let v = if v.0 < 0.0 || (v.0 == 0.0 && v.1 < 0.0) {
        (-v.0, -v.1)
    } else {
        v
    };
    (v, l1, l2)
}

/// Principal-axis slope of `(u, v)` points and the leading eigenvalue share.
pub fn pca2(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: points.len(),
        });
    }
    let [a, b, c] = covariance2(points);
    if !(a + c > 0.0) {
        return Err(Error::degenerate("all points coincide"));
    }
    let (vec, l1, l2) = eigen2(a, b, c);
    if abs(vec.0) <= 1e-12 * sqrt(vec.0 * vec.0 + vec.1 * vec.1) {
        return Err(Error::degenerate("principal axis is vertical"));
    }
    Ok((vec.1 / vec.0, l1 / (l1 + l2.max(0.0))))
}

fn covariance3(points: &[LogPoint]) -> [[f64; 3]; 3] {
    let n = points.len() as f64;
    let mut mean = [0.0; 3];
    for p in points {
        mean[0] += p.log_t;
        mean[1] += p.log_n;
        mean[2] += p.log_v;
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut c = [[0.0; 3]; 3];
    for p in points {
        let d = [p.log_t - mean[0], p.log_n - mean[1], p.log_v - mean[2]];
        for i in 0..3 {
            for j in i..3 {
                c[i][j] += d[i] * d[j];
            }
        }
    }
    for i in 0..3 {
        for j in i..3 {
            c[i][j] /= n - 1.0;
            c[j][i] = c[i][j];
        }
    }
    c
}

/// Cyclic Jacobi eigen-decomposition of a symmetric 3x3 matrix. Returns the
/// eigenvalues and the eigenvectors as columns.
pub fn jacobi_eigen3(mut a: [[f64; 3]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _sweep in 0..64 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        let diag = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
        if off <= 1e-32 * diag || off == 0.0 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (abs(theta) + sqrt(theta * theta + 1.0));
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / sqrt(t * t + 1.0);
            let s = t * c;
            for k in 0..3 {
                let (akp, akq) = (a[k][p], a[k][q]);
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let (apk, aqk) = (a[p][k], a[q][k]);
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let (vp, vq) = (row[p], row[q]);
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2]], v)
}

/// Leading eigenvector `(a_T, a_N, a_V)` with `a_V > 0`, and the variance
/// share of its eigenvalue.
pub fn principal_axis3(points: &[LogPoint]) -> Result<([f64; 3], f64)> {
    if points.len() < 4 {
        return Err(Error::TooFewPoints {
            needed: 4,
            got: points.len(),
        });
    }
    let cov = covariance3(points);
    let trace = cov[0][0] + cov[1][1] + cov[2][2];
    if !(trace > 0.0) {
        return Err(Error::degenerate("all points coincide"));
    }
    let (vals, vecs) = jacobi_eigen3(cov);
    let lead = (0..3)
        .max_by(|&i, &j| vals[i].total_cmp(&vals[j]))
        .expect("three eigenvalues");
    let mut axis = [vecs[0][lead], vecs[1][lead], vecs[2][lead]];
    if axis[2] < 0.0 {
        axis.iter_mut().for_each(|x| *x = -*x);
    }
    let total: f64 = vals.iter().map(|v| v.max(0.0)).sum();
    Ok((axis, vals[lead] / total))
}

/// Joint principal axis of `(ln T, ln N_m, ln V_m)`.
pub fn pca3(points: &[LogPoint]) -> Result<AllometricFit> {
    let (axis, share) = principal_axis3(points)?;
    let [a_t, a_n, a_v] = axis;
    let tol = 1e-12;
    if abs(a_v) <= tol || abs(a_t) <= tol {
        return Err(Error::degenerate(
            "principal axis has no V_m or T component",
        ));
    }
    Ok(AllometricFit {
        mode: Mode::Tri,
        g1: a_n / a_v,
        g2: a_t / a_v,
        g3: a_n / a_t,
        ci95: None,
        explained_variance: alloc::vec![share],
        n_points: points.len(),
    })
}

/// Bivariate slopes for each relation.
pub fn pca_pairs(points: &[LogPoint]) -> Result<AllometricFit> {
    let mut g = [0.0; 3];
    let mut shares = Vec::with_capacity(3);
    for (i, rel) in Relation::ALL.into_iter().enumerate() {
        let pairs: Vec<(f64, f64)> = points.iter().map(|p| rel.project(p)).collect();
        let (slope, share) = pca2(&pairs)?;
        g[i] = slope;
        shares.push(share);
    }
    Ok(AllometricFit {
        mode: Mode::Bi,
        g1: g[0],
        g2: g[1],
        g3: g[2],
        ci95: None,
        explained_variance: shares,
        n_points: points.len(),
    })
}

// ---------------------------------------------------------------------------
// Bootstrap

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// Bivariate slope of one relation.
    Pca2(Relation),
    /// One exponent of the trivariate fit.
    Pca3(Relation),
}

fn estimate(points: &[LogPoint], est: Estimator) -> Result<f64> {
    match est {
        Estimator::Pca2(rel) => {
            let pairs: Vec<(f64, f64)> = points.iter().map(|p| rel.project(p)).collect();
            pca2(&pairs).map(|r| r.0)
        }
        Estimator::Pca3(rel) => pca3(points).map(|f| match rel {
            Relation::G1 => f.g1,
            Relation::G2 => f.g2,
            Relation::G3 => f.g3,
        }),
    }
}

/// Percentile intervals of several statistics computed on the same
/// resamples.
pub fn bootstrap_many<F, const K: usize>(
    points: &[LogPoint],
    resamples: usize,
    seed: u64,
    stat: F,
) -> Result<[(f64, f64); K]>
where
    F: Fn(&[LogPoint]) -> Result<[f64; K]>,
{
    if resamples < MIN_BOOTSTRAP {
        return Err(Error::param(
            "resamples",
            alloc::format!("need at least {MIN_BOOTSTRAP}"),
        ));
    }
    let n = points.len();
    if n == 0 {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    let mut rng = rng_from(seed, &[tag("allometry-bootstrap")]);
    let mut buf = Vec::with_capacity(n);
    let mut draws: [Vec<f64>; K] = core::array::from_fn(|_| Vec::with_capacity(resamples));
    let mut failed = 0;
    for _ in 0..resamples {
        buf.clear();
        buf.extend((0..n).map(|_| points[rng.random_range(0..n)]));
        match stat(&buf) {
            Ok(vals) => {
                for (d, v) in draws.iter_mut().zip(vals) {
                    d.push(v);
                }
            }
            Err(_) => failed += 1,
        }
    }
    if failed * 100 > resamples {
        return Err(Error::BootstrapFailure {
            failed,
            total: resamples,
        });
    }
    Ok(core::array::from_fn(|i| {
        let d = &mut draws[i];
        d.sort_unstable_by(f64::total_cmp);
        (quantile_sorted(d, 0.025), quantile_sorted(d, 0.975))
    }))
}

/// Percentile 95% interval of one estimator over `resamples` resamples.
pub fn bootstrap_ci(points: &[LogPoint], est: Estimator, resamples: usize, seed: u64) -> Result<(f64, f64)> {
    bootstrap_many(points, resamples, seed, |pts| estimate(pts, est).map(|g| [g]))
        .map(|[ci]| ci)
}

/// Fit in either mode and attach bootstrap intervals for all three exponents.
pub fn fit_with_ci(points: &[LogPoint], mode: Mode, resamples: usize, seed: u64) -> Result<AllometricFit> {
    let (mut fit, stat): (AllometricFit, fn(&[LogPoint]) -> Result<[f64; 3]>) = match mode {
        Mode::Bi => (pca_pairs(points)?, |p| pca_pairs(p).map(|f| f.exponents())),
        Mode::Tri => (pca3(points)?, |p| pca3(p).map(|f| f.exponents())),
    };
    let mode_tag = match mode {
        Mode::Bi => 0,
        Mode::Tri => 1,
    };
    fit.ci95 = Some(bootstrap_many(points, resamples, crate::rng::derive_seed(seed, &[mode_tag]), stat)?);
    Ok(fit)
}

// ---------------------------------------------------------------------------
// Per firm

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct FirmExponents {
    pub n_patches: usize,
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
}

/// Bivariate exponents for each firm with at least `min_patches` points.
/// Firms whose fit is degenerate are left out.
pub fn per_firm_exponents(
    groups: &BTreeMap<FirmId, Vec<LogPoint>>,
    min_patches: usize,
) -> BTreeMap<FirmId, FirmExponents> {
    groups
        .iter()
        .filter(|(_, pts)| pts.len() >= min_patches)
        .filter_map(|(firm, pts)| {
            let fit = pca_pairs(pts).ok()?;
            Some((
                firm.clone(),
                FirmExponents {
                    n_patches: pts.len(),
                    g1: fit.g1,
                    g2: fit.g2,
                    g3: fit.g3,
                },
            ))
        })
        .collect()
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Dispersion {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

pub fn dispersion(xs: impl IntoIterator<Item = f64>) -> Option<Dispersion> {
    let xs: Vec<f64> = xs.into_iter().collect();
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() > 1 {
        sqrt(xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0))
    } else {
        0.0
    };
    Some(Dispersion {
        n: xs.len(),
        mean,
        sd,
    })
}
