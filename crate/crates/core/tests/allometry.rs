use std::collections::BTreeMap;

use patchscale_core::allometry::{
    bootstrap_ci, dispersion, fit_with_ci, pca2, pca3, pca_pairs, per_firm_exponents, Estimator, LogPoint,
    Mode, Relation,
};
use patchscale_core::market::FirmId;
use patchscale_core::rng::rng_from;
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};

/// Latent scale `s ~ N(0, sd^2)` along `(g2, g1, 1)` in `(ln T, ln N, ln V)`
/// plus isotropic noise.
fn cloud(n: usize, g1: f64, g2: f64, sd: f64, noise: f64, seed: u64) -> Vec<LogPoint> {
    let mut rng = rng_from(seed, &[]);
    let mut z = || -> f64 { StandardNormal.sample(&mut rng) };
    (0..n)
        .map(|_| {
            let s = sd * z();
            LogPoint {
                log_t: g2 * s + noise * z(),
                log_n: g1 * s + noise * z(),
                log_v: s + noise * z(),
            }
        })
        .collect()
}

/// 2-D cloud with major-axis slope `g` and leading-eigenvalue share `share`.
fn cloud2(n: usize, g: f64, share: f64, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = rng_from(seed, &[]);
    let norm = (1.0 + g * g).sqrt();
    let (ux, uy) = (1.0 / norm, g / norm);
    let minor = (1.0 / share - 1.0).sqrt();
    (0..n)
        .map(|_| {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            let b = minor * b;
            (a * ux - b * uy, a * uy + b * ux)
        })
        .collect()
}

#[test]
fn explained_variance_benchmarks() {
    for (g, share) in [(1.1, 0.91), (1.9, 0.83), (0.66, 0.89)] {
        let (slope, ev) = pca2(&cloud2(20_000, g, share, 17)).unwrap();
        assert!((ev - share).abs() <= 0.05, "share {ev} vs {share}");
        assert!((slope - g).abs() < 0.05 * g, "slope {slope} vs {g}");
    }
}

#[test]
fn calibrated_cloud_recovered_within_bootstrap_ci() {
    let (g1, g2) = (1.2, 1.8);
    let planted = [g1, g2, g1 / g2];
    let mut inside = [0; 3];
    for seed in 0..12 {
        let pts = cloud(2000, g1, g2, 1.0, 0.3, 50 + seed);
        let fit = fit_with_ci(&pts, Mode::Tri, 300, seed).unwrap();
        assert!((fit.g1 - fit.g2 * fit.g3).abs() <= 1e-12 * fit.g1.abs());
        for (i, (lo, hi)) in fit.ci95.unwrap().into_iter().enumerate() {
            if lo <= planted[i] && planted[i] <= hi {
                inside[i] += 1;
            }
        }
    }
    assert!(inside.iter().all(|&c| c >= 10), "{inside:?}");
}

#[test]
fn nested_bootstrap_width_ratio() {
    let big = cloud(8000, 1.1, 1.9, 1.0, 0.5, 3);
    let small = &big[..2000];
    let width = |pts: &[LogPoint]| {
        let (lo, hi) = bootstrap_ci(pts, Estimator::Pca2(Relation::G1), 400, 11).unwrap();
        hi - lo
    };
    let ratio = width(small) / width(&big);
    assert!((ratio / 2.0 - 1.0).abs() <= 0.25, "{ratio}");
}

#[test]
fn homogeneous_firms_scatter_around_the_pool() {
    let mut groups: BTreeMap<FirmId, Vec<LogPoint>> = BTreeMap::new();
    for f in 0..40 {
        let firm = FirmId(format!("F{f:02}"));
        // Firms differ in scale (a shift along the axis), not in exponents.
        let shift = 0.2 * f as f64;
        let pts = cloud(60, 1.1, 1.9, 0.8, 0.3, 900 + f)
            .into_iter()
            .map(|p| LogPoint {
                log_t: p.log_t + 1.9 * shift,
                log_n: p.log_n + 1.1 * shift,
                log_v: p.log_v + shift,
            })
            .collect();
        groups.insert(firm, pts);
    }
    groups.insert(FirmId::from("tiny"), cloud(9, 1.1, 1.9, 1.0, 0.3, 1));
    let per_firm = per_firm_exponents(&groups, 10);
    assert_eq!(per_firm.len(), 40);
    let pooled: Vec<LogPoint> = groups.values().flatten().copied().collect();
    let pooled = pca_pairs(&pooled).unwrap();
    for (get, target) in [
        (Box::new(|e: &patchscale_core::allometry::FirmExponents| e.g1) as Box<dyn Fn(&_) -> f64>, pooled.g1),
        (Box::new(|e: &patchscale_core::allometry::FirmExponents| e.g2), pooled.g2),
    ] {
        let d = dispersion(per_firm.values().map(get)).unwrap();
        assert!((d.mean - target).abs() <= 3.0 * d.sd / (d.n as f64).sqrt(), "{d:?} vs {target}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn currency_rescaling_changes_nothing(seed in 0u64..1000, c in 1e-4f64..1e4) {
        let pts = cloud(300, 1.1, 1.9, 1.0, 0.4, seed);
        let shifted: Vec<LogPoint> = pts.iter().map(|p| LogPoint { log_v: p.log_v + c.ln(), ..*p }).collect();
        let (a, b) = (pca_pairs(&pts).unwrap(), pca_pairs(&shifted).unwrap());
        for (x, y) in a.exponents().iter().zip(b.exponents()) {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs());
        }
        for (x, y) in a.explained_variance.iter().zip(&b.explained_variance) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
        let (a, b) = (pca3(&pts).unwrap(), pca3(&shifted).unwrap());
        prop_assert!((a.g2 - b.g2).abs() <= 1e-9 * a.g2.abs());
    }

    #[test]
    fn swapped_axes_are_reciprocal(seed in 0u64..1000) {
        let pairs: Vec<(f64, f64)> = cloud(200, 1.3, 1.0, 1.0, 0.5, seed).iter().map(|p| (p.log_v, p.log_n)).collect();
        let swapped: Vec<(f64, f64)> = pairs.iter().map(|&(u, v)| (v, u)).collect();
        let (g, _) = pca2(&pairs).unwrap();
        let (h, _) = pca2(&swapped).unwrap();
        prop_assert!((g * h - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn trivariate_identity(seed in 0u64..1000, g1 in 0.2f64..3.0, g2 in 0.2f64..3.0) {
        let fit = pca3(&cloud(100, g1, g2, 1.0, 0.3, seed)).unwrap();
        prop_assert!((fit.g1 - fit.g2 * fit.g3).abs() <= 1e-12 * fit.g1.abs().max(1.0));
    }
}
