use donut_core::metrics;
use donut_core::oracle::{
    combination_loss, decompose_loss, greedy_build, optimal_selection, optimal_weights,
    optimal_weights_with_incumbent, size_histogram, OracleInstance,
    ACTIVE_EPS,
};
use donut_core::{ModelId, Period, PeriodName};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(rng: &mut ChaCha8Rng, k: usize, h: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let y: Vec<f64> = (0..h).map(|_| rng.random_range(-5.0..5.0)).collect();
    let rows = (0..k)
        .map(|_| {
            let bias = rng.random_range(-3.0..3.0);
            y.iter().map(|v| v + bias + rng.random_range(-2.0..2.0)).collect()
        })
        .collect();
    (rows, y)
}

/// Brute force over the 0.01-step grid of the 3-simplex.
fn grid_min(rows: &[Vec<f64>], y: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for a in 0..=100 {
        for b in 0..=(100 - a) {
            let x = [a as f64 / 100.0, b as f64 / 100.0, (100 - a - b) as f64 / 100.0];
            best = best.min(combination_loss(&x, rows, y));
        }
    }
    best
}

#[test]
fn simplex_meets_grid_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let (rows, y) = instance(&mut rng, 3, 4);
        let s = optimal_weights(&rows, &y).unwrap();
        let g = grid_min(&rows, &y);
        let spread = (0..4)
            .map(|t| {
                let col = rows.iter().map(|r| r[t]);
                col.clone().fold(f64::NEG_INFINITY, f64::max) - col.fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        assert!(s.objective <= g + 1e-12, "{} > grid {}", s.objective, g);
        assert!(s.objective >= g - 4.0 * 0.02 * spread);
    }
}

#[test]
fn certificate_and_complementarity() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..300 {
        let k = rng.random_range(1..=14);
        let h = rng.random_range(1..=18);
        let (rows, y) = instance(&mut rng, k, h);
        let s = optimal_weights(&rows, &y).unwrap();
        assert!(s.min_reduced_cost >= -1e-10);
        assert!(s.max_violation <= 1e-9);
        assert!((s.x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(s.x.iter().all(|&v| v >= 0.0));
        for t in 0..h {
            assert_eq!(s.z_plus[t].min(s.z_minus[t]), 0.0);
        }
    }
}

#[test]
fn mase_conversion_matches_metrics() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let period = Period::new(PeriodName::Quarterly);
    for _ in 0..100 {
        let train: Vec<f64> = (0..30).map(|t| 50.0 + t as f64 + rng.random_range(-4.0..4.0)).collect();
        let (rows, y) = instance(&mut rng, 5, period.h);
        let y: Vec<f64> = y.iter().map(|v| v + 80.0).collect();
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v + 80.0).collect()).collect();
        let s = optimal_weights(&rows, &y).unwrap();
        let scale = metrics::mase_scale(&train, period.m).unwrap();
        let combined: Vec<f64> = (0..y.len()).map(|t| (0..5).map(|i| s.x[i] * rows[i][t]).sum()).collect();
        let mase = metrics::mase(&train, period.m, &y, &combined).unwrap();
        assert!((s.e_loss_mase(scale) - mase).abs() < 1e-9);
    }
}

#[test]
fn combination_never_loses_to_selection() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..10_000 {
        let k = rng.random_range(1..=6);
        let (rows, y) = instance(&mut rng, k, 4);
        let s = optimal_weights(&rows, &y).unwrap();
        let (_, sel) = optimal_selection(&rows, &y).unwrap();
        assert!(s.objective <= sel, "{} > {}", s.objective, sel);
    }
}

#[test]
fn nested_pools_are_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..1_000 {
        let k = rng.random_range(2..=8);
        let h = rng.random_range(1..=8);
        let (rows, y) = instance(&mut rng, k, h);
        let mut prev = optimal_weights(&rows[..1], &y).unwrap();
        for j in 2..=k {
            let mut incumbent = prev.x.clone();
            incumbent.push(0.0);
            let warm = optimal_weights_with_incumbent(&rows[..j], &y, &incumbent).unwrap();
            assert!(warm.objective <= prev.objective, "pool {j}: {} > {}", warm.objective, prev.objective);
            let cold = optimal_weights(&rows[..j], &y).unwrap();
            assert!(cold.objective <= prev.objective * (1.0 + 1e-12) + 1e-12);
            assert!((cold.objective - warm.objective).abs() <= 1e-12 * (1.0 + warm.objective));
            prev = warm;
        }
    }
}

#[test]
fn selection_ties_go_to_lowest_index() {
    let rows = vec![vec![1.0, 2.0], vec![0.0, 1.0], vec![0.0, 1.0]];
    assert_eq!(optimal_selection(&rows, &[0.0, 1.0]).unwrap(), (1, 0.0));
    assert_eq!(optimal_selection(&rows[..1], &[0.0, 1.0]).unwrap().0, 0);
}

#[test]
fn decomposition_of_worst_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..200 {
        let (rows, y) = instance(&mut rng, 4, 6);
        let losses: Vec<f64> = rows.iter().map(|r| r.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum()).collect();
        let worst = (0..4).max_by(|&a, &b| losses[a].total_cmp(&losses[b])).unwrap();
        let d = decompose_loss(&rows[worst], &rows, &y, 1.7).unwrap();
        assert!(d.p_loss > 0.0);
        assert_eq!(d.p_loss + d.e_loss, d.total_loss);
    }
}

fn bracket_instances(n: usize, seed: u64) -> Vec<OracleInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let actual: Vec<f64> = (0..6).map(|_| rng.random_range(10.0..20.0)).collect();
            let mut rows = vec![actual.iter().map(|v| v + 5.0).collect::<Vec<f64>>(); ModelId::ALL.len()];
            rows[0] = actual.iter().map(|v| v - 1.0).collect();
            rows[1] = actual.iter().map(|v| v + 1.0).collect();
            OracleInstance {
                id: format!("B{i}"),
                rows,
                actual,
                scale: 1.0,
            }
        })
        .collect()
}

#[test]
fn greedy_finds_the_bracket() {
    let inst = bracket_instances(20, 17);
    let pool = [ModelId::ALL[2], ModelId::ALL[0], ModelId::ALL[1]];
    let g = greedy_build(&inst, &pool).unwrap();
    assert_eq!(g.curve.len(), 3);
    assert!((g.curve[0] - 1.0).abs() < 1e-12);
    assert!(g.curve[1] < 1e-12);
    assert!(g.curve.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn greedy_identical_pool_is_flat() {
    let mut inst = bracket_instances(5, 18);
    for i in &mut inst {
        let r = i.rows[0].clone();
        i.rows.iter_mut().for_each(|x| *x = r.clone());
    }
    let g = greedy_build(&inst, &ModelId::ALL[..4]).unwrap();
    assert!(g.curve.windows(2).all(|w| w[1] == w[0]));
}

#[test]
fn bracket_corpus_is_all_pairs() {
    let inst = bracket_instances(30, 19);
    let pool = &ModelId::ALL[..2];
    let sols = donut_core::oracle::solve_corpus(&inst, pool).unwrap();
    let h = size_histogram(&sols, ACTIVE_EPS);
    assert_eq!(h.counts[2], 30);
    assert_eq!(h.single_model_share, 0.0);
}

proptest! {
    #[test]
    fn objective_is_translation_and_scale_equivariant(seed in 0u64..10_000, c in -50.0f64..50.0, a in 0.1f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (rows, y) = instance(&mut rng, 4, 5);
        let base = optimal_weights(&rows, &y).unwrap().objective;
        let rows2: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| a * v + c).collect()).collect();
        let y2: Vec<f64> = y.iter().map(|v| a * v + c).collect();
        let moved = optimal_weights(&rows2, &y2).unwrap().objective;
        prop_assert!((moved - a * base).abs() <= 1e-9 * (1.0 + a * base));
    }
}
