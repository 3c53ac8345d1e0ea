use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{mean, sd, t_test};
use crate::weight_net::{combine, owa_and_grad, WeightNet, WnSample};

pub const DEFAULT_REPEATS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRecord {
    pub feature: String,
    /// Mean of `loss(permuted) − loss(baseline)` over the repeats.
    pub importance: f64,
    pub t_stat: f64,
    /// One-sided p-value of `importance > 0`.
    pub p_value: f64,
    pub repeats: usize,
    pub sd: f64,
}

/// SplitMix64 mix of a base seed with two stream indices.
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn permuted(table: &[Vec<f64>], columns: &[usize], perm: &[usize]) -> Vec<Vec<f64>> {
    let mut out = table.to_vec();
    for (row, &src) in out.iter_mut().zip(perm) {
        for &c in columns {
            row[c] = table[src][c];
        }
    }
    out
}

/// Importance of `columns` (moved jointly) under the given row
/// permutations, one repeat per permutation.
pub fn permutation_importance_with<F>(
    name: &str,
    table: &[Vec<f64>],
    columns: &[usize],
    loss: &F,
    perms: &[Vec<usize>],
) -> Result<ImportanceRecord>
where
    F: Fn(&[Vec<f64>]) -> f64 + Sync,
{
    if table.len() < 2 {
        return Err(Error::SingleSeriesCorpus);
    }
    let width = table[0].len();
    if let Some(&c) = columns.iter().find(|&&c| c >= width) {
        return Err(Error::shape(format!("column < {width}"), c));
    }
    if let Some(p) = perms.iter().find(|p| p.len() != table.len()) {
        return Err(Error::shape(table.len(), p.len()));
    }
    let baseline = loss(table);
    let deltas: Vec<f64> = perms
        .par_iter()
        .map(|p| loss(&permuted(table, columns, p)) - baseline)
        .collect();
    let tt = t_test(&deltas, 0.0);
    Ok(ImportanceRecord {
        feature: name.to_string(),
        importance: mean(&deltas),
        t_stat: tt.t,
        p_value: tt.p_upper,
        repeats: deltas.len(),
        sd: if deltas.len() > 1 { sd(&deltas) } else { 0.0 },
    })
}

/// Importance of `columns` over `repeats` seeded shuffles. Repeat `r`
/// shuffles with a stream derived from `(seed, stream, r)`.
pub fn permutation_importance<F>(
    name: &str,
    table: &[Vec<f64>],
    columns: &[usize],
    loss: &F,
    seed: u64,
    stream: u64,
    repeats: usize,
) -> Result<ImportanceRecord>
where
    F: Fn(&[Vec<f64>]) -> f64 + Sync,
{
    if repeats < 2 {
        return Err(Error::InvalidArgument("permutation importance needs at least two repeats".into()));
    }
    let perms: Vec<Vec<usize>> = (0..repeats as u64)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, stream, r));
            let mut p: Vec<usize> = (0..table.len()).collect();
            p.shuffle(&mut rng);
            p
        })
        .collect();
    permutation_importance_with(name, table, columns, loss, &perms)
}

/// Mean per-series OWA of the net's combination when the standardized
/// features are replaced by `table` (row `i` belongs to `samples[i]`).
pub fn net_loss_with_features(net: &WeightNet, samples: &[WnSample], table: &[Vec<f64>]) -> f64 {
    let per: Vec<f64> = samples
        .par_iter()
        .zip(table)
        .map(|(s, f)| {
            let w = net.forward(f).expect("feature width checked by caller");
            let c = combine(&w, &s.forecasts).expect("validated sample shape");
            owa_and_grad(&c, &s.actual, &s.baseline).0
        })
        .collect();
    per.iter().sum::<f64>() / per.len().max(1) as f64
}

fn feature_table(samples: &[WnSample]) -> Vec<Vec<f64>> {
    samples.iter().map(|s| s.features.clone()).collect()
}

/// Single-feature importances of the weighting net, in feature order.
pub fn feature_importance(
    net: &WeightNet,
    samples: &[WnSample],
    names: &[String],
    seed: u64,
    repeats: usize,
) -> Result<Vec<ImportanceRecord>> {
    let table = feature_table(samples);
    let loss = |t: &[Vec<f64>]| net_loss_with_features(net, samples, t);
    names
        .iter()
        .enumerate()
        .map(|(j, name)| permutation_importance(name, &table, &[j], &loss, seed, j as u64, repeats))
        .collect()
}

/// Joint importance of each feature cluster: all member columns are moved
/// by the same row permutation.
pub fn cluster_importance(
    net: &WeightNet,
    samples: &[WnSample],
    clusters: &[Vec<usize>],
    seed: u64,
    repeats: usize,
) -> Result<Vec<ImportanceRecord>> {
    if clusters.len() < 2 {
        return Err(Error::InvalidArgument("cluster importance needs at least two clusters".into()));
    }
    let table = feature_table(samples);
    let loss = |t: &[Vec<f64>]| net_loss_with_features(net, samples, t);
    clusters
        .iter()
        .enumerate()
        .map(|(k, cols)| {
            permutation_importance(&format!("cluster_{}", k + 1), &table, cols, &loss, seed, 1_000 + k as u64, repeats)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_constant_give_zero() {
        let table: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 * 0.37, 4.0]).collect();
        let loss = |t: &[Vec<f64>]| t.iter().enumerate().map(|(i, r)| (r[0] - i as f64).powi(2) + r[1]).sum::<f64>();
        let id: Vec<usize> = (0..20).collect();
        let rec = permutation_importance_with("a", &table, &[0], &loss, &[id.clone(), id]).unwrap();
        assert_eq!(rec.importance, 0.0);
        assert_eq!(rec.p_value, 1.0);
        let rec = permutation_importance("b", &table, &[1], &loss, 3, 1, 5).unwrap();
        assert_eq!(rec.importance, 0.0);
    }

    #[test]
    fn single_series_is_rejected() {
        let loss = |_: &[Vec<f64>]| 0.0;
        assert!(matches!(
            permutation_importance("a", &[vec![1.0]], &[0], &loss, 1, 0, 5),
            Err(Error::SingleSeriesCorpus)
        ));
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0, 0), derive_seed(1, 0, 1));
        assert_ne!(derive_seed(1, 0, 1), derive_seed(1, 1, 0));
        assert_eq!(derive_seed(9, 2, 3), derive_seed(9, 2, 3));
    }
}
