use std::collections::HashMap;

use donut_core::analysis::{
    cluster_features, compare_buckets, correlation_distance, correlation_matrix, feature_importance,
    net_loss_with_features, owa_breakdown, permutation_importance, permutation_importance_with, ward_linkage,
    Bucketing, SeriesOwa,
};
use donut_core::metrics::SeriesBaseline;
use donut_core::neural::Parameterized;
use donut_core::weight_net::{feature_names, WeightNet, WnSample, N_FEATURES};
use donut_core::{PeriodName, SeriesType, N_MODELS};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn closure_single_signal() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let table: Vec<Vec<f64>> = (0..200).map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let target: Vec<f64> = table.iter().map(|r| r[2]).collect();
    let loss = |t: &[Vec<f64>]| t.iter().zip(&target).map(|(r, y)| (r[2] - y).powi(2)).sum::<f64>() / t.len() as f64;
    let recs: Vec<_> = (0..5)
        .map(|j| permutation_importance(&format!("f{j}"), &table, &[j], &loss, 7, j as u64, 5).unwrap())
        .collect();
    assert!(recs[2].importance > 0.0 && recs[2].p_value < 0.01);
    for (j, r) in recs.iter().enumerate() {
        if j != 2 {
            assert_eq!(r.importance, 0.0);
        }
    }
    let id: Vec<usize> = (0..200).collect();
    let zero = permutation_importance_with("f2", &table, &[2], &loss, &vec![id; 5]).unwrap();
    assert_eq!(zero.importance, 0.0);
}

fn signal_samples(n: usize, signal: usize, seed: u64) -> Vec<WnSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let features: Vec<f64> = (0..N_FEATURES).map(|_| rng.random_range(-1.5..1.5)).collect();
            let actual: Vec<f64> = (0..6).map(|_| rng.random_range(90.0..110.0)).collect();
            // Model 0 is right when the signal is positive, model 1 otherwise.
            let good = if features[signal] > 0.0 { 0 } else { 1 };
            let forecasts = (0..N_MODELS)
                .map(|k| {
                    let off = if k == good { 0.5 } else { 15.0 };
                    actual.iter().map(|y| y + off).collect()
                })
                .collect();
            WnSample {
                id: format!("s{i}"),
                features,
                forecasts,
                actual,
                baseline: SeriesBaseline {
                    scale: 5.0,
                    smape_naive2: 10.0,
                    mase_naive2: 2.0,
                },
            }
        })
        .collect()
}

/// A net whose only path runs through feature `signal`: hidden unit 0 is
/// relu(x), unit 1 is relu(−x); output logits favour model 0 or model 1.
fn signal_net(signal: usize) -> WeightNet {
    let mut net = WeightNet::new(4, 0.0, 1);
    let mut params = net.params_mut();
    for p in params.iter_mut() {
        p.data.iter_mut().for_each(|v| *v = 0.0);
    }
    params[0].data[signal] = 4.0;
    params[0].data[N_FEATURES + signal] = -4.0;
    // out.w is N_MODELS × 4.
    params[2].data[0] = 6.0;
    params[2].data[4 + 1] = 6.0;
    net
}

#[test]
fn weight_net_single_signal() {
    let signal = 17;
    let samples = signal_samples(300, signal, 3);
    let net = signal_net(signal);
    let names = feature_names();
    let recs = feature_importance(&net, &samples, &names, 11, 5).unwrap();
    let a = &recs[signal];
    assert!(a.importance > 0.0 && a.p_value < 0.01, "{a:?}");
    for (j, r) in recs.iter().enumerate() {
        if j != signal {
            assert!(r.importance.abs() < a.importance / 10.0, "{}: {r:?}", names[j]);
        }
    }
    let table: Vec<Vec<f64>> = samples.iter().map(|s| s.features.clone()).collect();
    let base = net_loss_with_features(&net, &samples, &table);
    assert_eq!(base, net_loss_with_features(&net, &samples, &table));
}

#[test]
fn hand_traced_three_features() {
    // ρ12 = 0.8, ρ13 = −0.4, ρ23 = −0.2.
    let table = vec![
        vec![1.0, 1.0, 4.0],
        vec![2.0, 2.0, 1.0],
        vec![3.0, 4.0, 3.0],
        vec![4.0, 3.0, 2.0],
    ];
    let names: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
    let rho = correlation_matrix(&table);
    assert!((rho[0][1] - 0.8).abs() < 1e-15);
    assert!((rho[0][2] + 0.4).abs() < 1e-15);
    assert!((rho[1][2] + 0.2).abs() < 1e-15);
    let d = cluster_features(&table, &names).unwrap();
    assert_eq!((d.merges[0].a, d.merges[0].b, d.merges[0].size), (0, 1, 2));
    assert!((d.merges[0].height - 0.4f64.sqrt()).abs() < 1e-12);
    // Ward update: ((1+1)·2.8 + (1+1)·2.4 − 1·0.4) / 3 = 10/3.
    assert_eq!((d.merges[1].a, d.merges[1].b, d.merges[1].size), (2, 3, 3));
    assert!((d.merges[1].height - (10.0f64 / 3.0).sqrt()).abs() < 1e-12);
    assert_eq!(d.leaf_order, vec![0, 1, 2]);
}

#[test]
fn anti_correlated_pair_is_at_distance_two() {
    let table: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, -2.0 * i as f64 + 3.0]).collect();
    let rho = correlation_matrix(&table);
    assert_eq!(correlation_distance(rho[0][1]), 2.0);
}

#[test]
fn zero_variance_feature_correlates_zero() {
    let table: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 5.0, (i * i) as f64]).collect();
    let rho = correlation_matrix(&table);
    assert_eq!(rho[0][1], 0.0);
    assert_eq!(rho[1][2], 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ward_heights_increase(seed in 0u64..100_000, p in 2usize..20, n in 3usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let mix: Vec<Vec<f64>> = (0..p).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let table: Vec<Vec<f64>> = base
            .iter()
            .map(|b| mix.iter().map(|w| w.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() + 0.1 * rng.random_range(-1.0..1.0)).collect())
            .collect();
        let names: Vec<String> = (0..p).map(|i| i.to_string()).collect();
        let d = cluster_features(&table, &names).unwrap();
        prop_assert_eq!(d.merges.len(), p - 1);
        prop_assert!(d.merges.windows(2).all(|w| w[0].height <= w[1].height + 1e-12));
        let mut order = d.leaf_order.clone();
        order.sort();
        prop_assert_eq!(order, (0..p).collect::<Vec<_>>());
        let rho = correlation_matrix(&table);
        for (i, row) in rho.iter().enumerate() {
            prop_assert_eq!(correlation_distance(row[i]), 0.0);
            for (j, &r) in row.iter().enumerate() {
                prop_assert!((0.0..=2.0).contains(&correlation_distance(r)));
                prop_assert_eq!(r, rho[j][i]);
            }
        }
    }

    #[test]
    fn ward_on_random_metric_is_monotone(seed in 0u64..100_000, n in 2usize..15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random_range(0.0..10.0), rng.random_range(0.0..10.0))).collect();
        let dist: Vec<Vec<f64>> = pts
            .iter()
            .map(|a| pts.iter().map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()).collect())
            .collect();
        let d = ward_linkage(&dist, (0..n).map(|i| i.to_string()).collect()).unwrap();
        prop_assert!(d.merges.windows(2).all(|w| w[0].height <= w[1].height + 1e-12));
    }

    #[test]
    fn breakdown_grand_mean(seed in 0u64..100_000, n in 1usize..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let recs: Vec<SeriesOwa> = (0..n)
            .map(|i| SeriesOwa {
                id: i.to_string(),
                period: PeriodName::ALL[rng.random_range(0..6)],
                series_type: SeriesType::ALL[rng.random_range(0..6)],
                owa: rng.random_range(0.2..2.0),
            })
            .collect();
        let b = owa_breakdown(&recs).unwrap();
        let pooled = recs.iter().map(|r| r.owa).sum::<f64>() / n as f64;
        prop_assert!((b.global_mean - pooled).abs() < 1e-12);
        let counted: usize = b.cells.iter().flatten().flatten().map(|c| c.n).sum();
        prop_assert_eq!(counted, n);
    }
}

fn owa_set(n: usize, seed: u64) -> Vec<SeriesOwa> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| SeriesOwa {
            id: format!("s{i}"),
            period: PeriodName::ALL[i % 6],
            series_type: SeriesType::ALL[(i / 6) % 2],
            owa: rng.random_range(0.5..1.5),
        })
        .collect()
}

#[test]
fn identical_sets_flag_nothing() {
    let a = owa_set(120, 1);
    let cells = compare_buckets(&a, &a, &Bucketing::TypePeriod, 0.01).unwrap();
    assert!(cells.iter().all(|c| c.mean_diff == 0.0 && !c.significant));
}

#[test]
fn shifted_bucket_is_flagged() {
    let a = owa_set(720, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let b: Vec<SeriesOwa> = a
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.owa = if r.period == PeriodName::Daily && r.series_type == SeriesType::Finance {
                r.owa + 0.1
            } else {
                r.owa + rng.random_range(-0.05..0.05)
            };
            r
        })
        .collect();
    let cells = compare_buckets(&a, &b, &Bucketing::TypePeriod, 0.01).unwrap();
    let target = cells.iter().find(|c| c.bucket == "Daily/Finance").unwrap();
    assert!(target.n >= 30 && target.p_value < 0.01 && target.significant);
}

#[test]
fn quantile_bins_are_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let a = owa_set(500, 5);
    let values: HashMap<String, f64> = a.iter().map(|r| (r.id.clone(), rng.random_range(0.0..1.0))).collect();
    let b: Vec<SeriesOwa> = a
        .iter()
        .map(|r| SeriesOwa {
            owa: r.owa - values[&r.id],
            ..r.clone()
        })
        .collect();
    let cells = compare_buckets(&a, &b, &Bucketing::FeatureQuantile { values, bins: 5 }, 0.01).unwrap();
    assert_eq!(cells.len(), 5);
    assert_eq!(cells[0].bucket, "q1");
    assert!(cells.windows(2).all(|w| w[0].mean_diff < w[1].mean_diff));
}
