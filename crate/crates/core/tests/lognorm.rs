use patchscale_core::lognorm::{jarque_bera, jarque_bera_with, lognormality, CriticalValues};
use patchscale_core::rng::rng_from;
use proptest::prelude::*;
use rand_distr::{Distribution, Exp1, StandardNormal};

fn normals(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from(seed, &[]);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

#[test]
fn lognormality_is_normality_of_logs() {
    for seed in 0..10 {
        let logs = normals(40, seed);
        let xs: Vec<f64> = logs.iter().map(|z| (2.0 + 0.7 * z).exp()).collect();
        let direct = jarque_bera(&logs.iter().map(|z| 2.0 + 0.7 * z).collect::<Vec<_>>()).unwrap();
        let via = lognormality(&xs, CriticalValues::SmallSample).unwrap();
        assert!((direct.jb_stat - via.jb_stat).abs() <= 1e-9 * direct.jb_stat.max(1.0));
        assert_eq!(direct.reject, via.reject);
    }
}

#[test]
fn size_and_power_at_large_n() {
    let rejected = (0..200)
        .filter(|&s| jarque_bera(&normals(10_000, 7000 + s)).unwrap().reject)
        .count();
    assert!((2..=20).contains(&rejected), "{rejected}/200");
    let mut rng = rng_from(77, &[]);
    for _ in 0..50 {
        let xs: Vec<f64> = (0..10_000).map(|_| Exp1.sample(&mut rng)).collect();
        assert!(jarque_bera(&xs).unwrap().reject);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn location_scale_invariance(seed in 0u64..10_000, a in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3], b in -1e4f64..1e4) {
        let xs = normals(60, seed);
        let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let p = jarque_bera_with(&xs, CriticalValues::Asymptotic).unwrap();
        let q = jarque_bera_with(&ys, CriticalValues::Asymptotic).unwrap();
        prop_assert!((p.jb_stat - q.jb_stat).abs() <= 1e-6 * p.jb_stat.max(1.0));
        prop_assert_eq!(p.reject, q.reject);
    }
}
