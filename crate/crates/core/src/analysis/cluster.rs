use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_CLUSTERS: usize = 6;

/// One agglomeration step. Leaves are `0..n`; the cluster formed by merge
/// `s` gets id `n + s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub labels: Vec<String>,
    pub merges: Vec<Merge>,
    pub leaf_order: Vec<usize>,
}

/// Pearson correlation between columns, using rows where both are finite.
/// Columns without spread correlate 0 with everything else, and bitwise
/// equal columns correlate 1.
pub fn correlation_matrix(table: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let p = table.first().map_or(0, Vec::len);
    let mut rho = vec![vec![0.0; p]; p];
    for i in 0..p {
        rho[i][i] = 1.0;
        for j in (i + 1)..p {
            let pairs: Vec<(f64, f64)> = table
                .iter()
                .map(|r| (r[i], r[j]))
                .filter(|(a, b)| a.is_finite() && b.is_finite())
                .collect();
            let r = if pairs.iter().all(|(a, b)| a.to_bits() == b.to_bits()) && !pairs.is_empty() {
                let a: Vec<f64> = pairs.iter().map(|x| x.0).collect();
                if a.iter().all(|&v| v == a[0]) {
                    0.0
                } else {
                    1.0
                }
            } else {
                let a: Vec<f64> = pairs.iter().map(|x| x.0).collect();
                let b: Vec<f64> = pairs.iter().map(|x| x.1).collect();
                crate::stats::pearson(&a, &b)
            };
            rho[i][j] = r;
            rho[j][i] = r;
        }
    }
    rho
}

/// `√(2(1 − ρ))`, in `[0, 2]`.
pub fn correlation_distance(rho: f64) -> f64 {
    (2.0 * (1.0 - rho)).max(0.0).sqrt()
}

/// Ward agglomeration of a symmetric distance matrix with the
/// Lance-Williams update. Ties go to the pair with the lowest ids.
pub fn ward_linkage(dist: &[Vec<f64>], labels: Vec<String>) -> Result<Dendrogram> {
    let n = dist.len();
    if n < 2 {
        return Err(Error::InvalidArgument("clustering needs at least two features".into()));
    }
    if labels.len() != n || dist.iter().any(|r| r.len() != n) {
        return Err(Error::shape(n, "non-square distance matrix or label count"));
    }
    // Squared distances between active clusters, indexed by cluster id.
    let total = 2 * n - 1;
    let mut d2 = vec![vec![f64::INFINITY; total]; total];
    for i in 0..n {
        for j in 0..n {
            d2[i][j] = dist[i][j] * dist[i][j];
        }
    }
    let mut size = vec![1usize; total];
    let mut children: Vec<Option<(usize, usize)>> = vec![None; total];
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let mut best = (0, 0, f64::INFINITY);
        for (x, &i) in active.iter().enumerate() {
            for &j in &active[x + 1..] {
                if d2[i][j] < best.2 {
                    best = (i, j, d2[i][j]);
                }
            }
        }
        let (a, b, dab) = best;
        let new = n + step;
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for &k in &active {
            if k == a || k == b {
                continue;
            }
            let nk = size[k] as f64;
            let v = ((na + nk) * d2[a][k] + (nb + nk) * d2[b][k] - nk * dab) / (na + nb + nk);
            d2[new][k] = v.max(0.0);
            d2[k][new] = d2[new][k];
        }
        size[new] = size[a] + size[b];
        children[new] = Some((a, b));
        active.retain(|&k| k != a && k != b);
        active.push(new);
        merges.push(Merge {
            a,
            b,
            height: dab.max(0.0).sqrt(),
            size: size[new],
        });
    }
    // Depth-first from the root, the child holding the lowest leaf first.
    let mut min_leaf: Vec<usize> = (0..total).collect();
    for id in n..total {
        let (a, b) = children[id].expect("internal node");
        min_leaf[id] = min_leaf[a].min(min_leaf[b]);
    }
    let mut leaf_order = Vec::with_capacity(n);
    let mut stack = vec![total - 1];
    while let Some(id) = stack.pop() {
        match children[id] {
            None => leaf_order.push(id),
            Some((a, b)) => {
                let (first, second) = if min_leaf[a] <= min_leaf[b] { (a, b) } else { (b, a) };
                stack.push(second);
                stack.push(first);
            }
        }
    }
    Ok(Dendrogram {
        labels,
        merges,
        leaf_order,
    })
}

/// Ward clustering of the columns of `table` on correlation distance.
pub fn cluster_features(table: &[Vec<f64>], names: &[String]) -> Result<Dendrogram> {
    if table.len() < 3 {
        return Err(Error::InvalidArgument("clustering needs at least three series".into()));
    }
    let width = names.len();
    if width < 2 {
        return Err(Error::InvalidArgument("clustering needs at least two features".into()));
    }
    if let Some(r) = table.iter().find(|r| r.len() != width) {
        return Err(Error::shape(width, r.len()));
    }
    let dist: Vec<Vec<f64>> = correlation_matrix(table)
        .into_iter()
        .map(|row| row.into_iter().map(correlation_distance).collect())
        .collect();
    ward_linkage(&dist, names.to_vec())
}

impl Dendrogram {
    pub fn n_leaves(&self) -> usize {
        self.labels.len()
    }

    /// Cluster label of every leaf after stopping `k − 1` merges short of
    /// the root. Labels are numbered by each cluster's lowest leaf.
    pub fn cut(&self, k: usize) -> Result<Vec<usize>> {
        let n = self.n_leaves();
        if k == 0 || k > n {
            return Err(Error::InvalidArgument(format!("cannot cut {n} leaves into {k} clusters")));
        }
        let mut parent: Vec<usize> = (0..2 * n - 1).collect();
        for (s, m) in self.merges.iter().take(n - k).enumerate() {
            parent[m.a] = n + s;
            parent[m.b] = n + s;
        }
        let root = |mut x: usize| {
            while parent[x] != x {
                x = parent[x];
            }
            x
        };
        let roots: Vec<usize> = (0..n).map(root).collect();
        let mut names: Vec<usize> = Vec::new();
        Ok(roots
            .iter()
            .map(|r| match names.iter().position(|x| x == r) {
                Some(p) => p,
                None => {
                    names.push(*r);
                    names.len() - 1
                }
            })
            .collect())
    }

    /// Member leaves of each cluster of [`Dendrogram::cut`].
    pub fn clusters(&self, k: usize) -> Result<Vec<Vec<usize>>> {
        let labels = self.cut(k)?;
        let mut out = vec![Vec::new(); k];
        for (leaf, &c) in labels.iter().enumerate() {
            out[c].push(leaf);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("f{i}")).collect()
    }

    #[test]
    fn distance_extremes() {
        assert_eq!(correlation_distance(1.0), 0.0);
        assert_eq!(correlation_distance(-1.0), 2.0);
        assert_eq!(correlation_distance(0.0), 2f64.sqrt());
    }

    #[test]
    fn duplicate_merges_first_at_zero() {
        let table: Vec<Vec<f64>> = (0..12)
            .map(|i| {
                let x = (i as f64 * 1.3).sin();
                vec![x, (i as f64).sqrt(), x, (i % 3) as f64]
            })
            .collect();
        let d = cluster_features(&table, &names(4)).unwrap();
        assert_eq!((d.merges[0].a, d.merges[0].b), (0, 2));
        assert_eq!(d.merges[0].height, 0.0);
        assert_eq!(d.merges.len(), 3);
        assert!(d.merges.windows(2).all(|w| w[0].height <= w[1].height));
    }

    #[test]
    fn cut_labels_follow_lowest_leaf() {
        let dist = vec![
            vec![0.0, 5.0, 1.0, 6.0],
            vec![5.0, 0.0, 5.5, 2.0],
            vec![1.0, 5.5, 0.0, 6.5],
            vec![6.0, 2.0, 6.5, 0.0],
        ];
        let d = ward_linkage(&dist, names(4)).unwrap();
        assert_eq!(d.cut(2).unwrap(), vec![0, 1, 0, 1]);
        assert_eq!(d.cut(4).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(d.cut(1).unwrap(), vec![0; 4]);
        assert_eq!(d.leaf_order, vec![0, 2, 1, 3]);
        assert!(d.cut(5).is_err());
    }
}
