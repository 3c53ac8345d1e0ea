use donut_core::stat_features::{extract_stat_features, N_STAT_FEATURES, SCALE_DEPENDENT_FEATURES, STAT_FEATURE_NAMES};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn series(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slope = rng.random_range(-0.5..0.5);
    let amp = rng.random_range(0.0..4.0);
    let mut ar = 0.0;
    (0..n)
        .map(|t| {
            ar = 0.6 * ar + rng.random_range(-1.0..1.0);
            30.0 + slope * t as f64 + amp * (t as f64 * std::f64::consts::TAU / 12.0).sin() + ar
        })
        .collect()
}

#[test]
fn names_and_order_are_fixed() {
    assert_eq!(N_STAT_FEATURES, 42);
    assert_eq!(STAT_FEATURE_NAMES.len(), 42);
    assert_eq!(STAT_FEATURE_NAMES[0], "x_acf1");
    assert_eq!(STAT_FEATURE_NAMES[24], "ARCH.LM");
    assert_eq!(STAT_FEATURE_NAMES[41], "s_len");
    let mut sorted = STAT_FEATURE_NAMES.to_vec();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), 42);
}

#[test]
fn white_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let y: Vec<f64> = (0..1000).map(|_| normal.sample(&mut rng)).collect();
    let f = extract_stat_features(&y, 1);
    assert!(f.get("x_acf1").unwrap().abs() < 0.1);
    assert!(f.get("entropy").unwrap() > 0.9);
}

#[test]
fn linear_trend() {
    let y: Vec<f64> = (0..100).map(|t| 3.0 + 0.7 * t as f64).collect();
    let f = extract_stat_features(&y, 1);
    assert!(f.get("trend").unwrap() > 0.99);
    assert_eq!(f.get("cross_ps").unwrap(), 1.0);
}

#[test]
fn non_seasonal_imputation() {
    let f = extract_stat_features(&series(3, 80), 1);
    for name in ["seas_acf1", "seas_pacf", "seas_str", "hw_gamma", "nperiods", "peak", "trough"] {
        assert_eq!(f.get(name).unwrap(), 0.0, "{name}");
    }
    assert_eq!(f.get("s_len").unwrap(), 80.0);
}

#[test]
fn ranges_and_determinism() {
    for seed in 0..20 {
        let y = series(seed, 60 + seed as usize * 7);
        let f = extract_stat_features(&y, 12);
        assert_eq!(f, extract_stat_features(&y, 12));
        assert!(f.values.iter().all(|v| v.is_finite()));
        for name in ["entropy", "trend", "seas_str", "hw_alpha", "hw_beta", "hw_gamma", "alpha", "beta"] {
            let v = f.get(name).unwrap();
            assert!((0.0..=1.0).contains(&v), "{name} = {v}");
        }
        assert_eq!(f.get("nperiods").unwrap(), 1.0);
        assert_eq!(f.get("seas_per").unwrap(), 12.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn affine_invariance(seed in 0u64..100_000, a in 0.01f64..100.0, b in -1_000.0f64..1_000.0, m in prop::sample::select(vec![1usize, 4, 12])) {
        let y = series(seed, 96);
        let z: Vec<f64> = y.iter().map(|v| a * v + b).collect();
        let fy = extract_stat_features(&y, m);
        let fz = extract_stat_features(&z, m);
        for (k, name) in STAT_FEATURE_NAMES.iter().enumerate() {
            if SCALE_DEPENDENT_FEATURES.contains(name) {
                continue;
            }
            let (u, v) = (fy.values[k], fz.values[k]);
            prop_assert!((u - v).abs() <= 1e-6 * (1.0 + u.abs()), "{name}: {u} vs {v}");
            prop_assert_eq!(fy.missing[k], fz.missing[k]);
        }
    }
}
