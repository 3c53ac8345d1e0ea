//! Linear quantile trend `ŷ = a + b·t` fitted by minimising the pinball
//! loss. Iteratively reweighted least squares supplies a starting line;
//! coordinate moves along the loss's edges (pivoting the line about a data
//! point it passes through, with an exact one-dimensional minimisation)
//! then walk to the exact minimiser.

use crate::stats::lstsq;

const MAX_ITER: usize = 200;

#[inline]
fn rho(u: f64, tau: f64) -> f64 {
    if u >= 0.0 {
        tau * u
    } else {
        (tau - 1.0) * u
    }
}

/// Pinball loss `Σ ρ_τ(y_t − a − b·t)` for `t = 1..=n`.
pub fn pinball_loss(y: &[f64], tau: f64, a: f64, b: f64) -> f64 {
    y.iter()
        .enumerate()
        .map(|(i, v)| rho(v - a - b * (i + 1) as f64, tau))
        .sum()
}

/// A fitted quantile line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileLine {
    pub a: f64,
    pub b: f64,
    pub loss: f64,
    pub iterations: usize,
}

fn irls_start(y: &[f64], tau: f64) -> Option<(f64, f64)> {
    let n = y.len();
    let ts: Vec<f64> = (1..=n).map(|t| t as f64).collect();
    let design: Vec<Vec<f64>> = ts.iter().map(|t| vec![1.0, *t]).collect();
    let mut coef = lstsq(&design, y)?.coef;
    let spread = y.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    let delta = 1e-6 * spread;
    for _ in 0..20 {
        let mut wd = Vec::with_capacity(n);
        let mut wy = Vec::with_capacity(n);
        for (t, v) in ts.iter().zip(y) {
            let r = v - coef[0] - coef[1] * t;
            let side = if r >= 0.0 { tau } else { 1.0 - tau };
            let w = (side / r.abs().max(delta)).sqrt();
            wd.push(vec![w, w * t]);
            wy.push(w * v);
        }
        coef = lstsq(&wd, &wy)?.coef;
    }
    Some((coef[0], coef[1]))
}

/// τ-quantile (lower order statistic) of `values`: a minimiser of
/// `Σ ρ_τ(v − c)` over `c`.
fn order_quantile(values: &mut [f64], tau: f64) -> f64 {
    let n = values.len();
    let k = ((tau * n as f64).ceil() as usize).clamp(1, n) - 1;
    let (_, v, _) = values.select_nth_unstable_by(k, |a, b| a.total_cmp(b));
    *v
}

/// Optimal slopes for lines forced through data point `j`: a single
/// slope, or the ends of a flat stretch of the loss.
fn pivot_slopes(y: &[f64], tau: f64, j: usize) -> Option<(f64, f64)> {
    let tj = (j + 1) as f64;
    let mut kinks: Vec<(f64, f64)> = Vec::with_capacity(y.len());
    let mut slope = 0.0;
    for (i, v) in y.iter().enumerate() {
        if i == j {
            continue;
        }
        let d = (i + 1) as f64 - tj;
        let r = v - y[j];
        // Left-hand slope of ρ_τ(r − b·d) in b, and its jump |d| at b = r/d.
        slope += if d > 0.0 { -d * tau } else { -d * (tau - 1.0) };
        kinks.push((r / d, d.abs()));
    }
    // Exact slopes are integer combinations of τ and 1 − τ; anything this
    // small is rounding noise around zero.
    let flat = 1e-12 * kinks.iter().map(|k| k.1).sum::<f64>();
    kinks.sort_by(|p, q| p.0.total_cmp(&q.0));
    for (k, &(u, jump)) in kinks.iter().enumerate() {
        slope += jump;
        if slope.abs() <= flat {
            let next = kinks.get(k + 1).map_or(u, |n| n.0);
            return Some((u, next));
        }
        if slope > 0.0 {
            return Some((u, u));
        }
    }
    None
}

/// Minimises the pinball loss at level `tau`. `None` when `n < 2` or the
/// search does not terminate within its iteration budget.
pub fn fit_quantile_line(y: &[f64], tau: f64) -> Option<QuantileLine> {
    let n = y.len();
    if n < 2 || !(tau > 0.0 && tau < 1.0) {
        return None;
    }
    let (_, b0) = irls_start(y, tau).unwrap_or((0.0, 0.0));
    let mut b = if b0.is_finite() { b0 } else { 0.0 };
    let mut resid: Vec<f64> = y
        .iter()
        .enumerate()
        .map(|(i, v)| v - b * (i + 1) as f64)
        .collect();
    let mut a = order_quantile(&mut resid, tau);
    let mut loss = pinball_loss(y, tau, a, b);
    let scale = y.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-300);
    for iteration in 0..MAX_ITER {
        let on_line: Vec<usize> = (0..n)
            .filter(|&i| (y[i] - a - b * (i + 1) as f64).abs() <= 1e-9 * scale)
            .collect();
        let mut improved = false;
        for j in on_line {
            let Some((nb, _)) = pivot_slopes(y, tau, j) else {
                continue;
            };
            let na = y[j] - nb * (j + 1) as f64;
            let nl = pinball_loss(y, tau, na, nb);
            if nl < loss - 1e-12 * (1.0 + loss.abs()) {
                a = na;
                b = nb;
                loss = nl;
                improved = true;
                break;
            }
        }
        if !improved {
            (a, b) = canonical(y, tau, a, b, scale);
            return Some(QuantileLine {
                a,
                b,
                loss: pinball_loss(y, tau, a, b),
                iterations: iteration,
            });
        }
    }
    None
}

/// When the optimum is a fan of lines through one data point, the middle
/// of the fan; the result then does not depend on where the descent
/// stopped, which keeps the fit shift and scale equivariant.
fn canonical(y: &[f64], tau: f64, a: f64, b: f64, scale: f64) -> (f64, f64) {
    let widest = (0..y.len())
        .filter(|&i| (y[i] - a - b * (i + 1) as f64).abs() <= 1e-9 * scale)
        .filter_map(|j| pivot_slopes(y, tau, j).map(|(lo, hi)| (j, lo, hi)))
        .filter(|&(_, lo, hi)| hi > lo)
        .max_by(|p, q| (p.2 - p.1).total_cmp(&(q.2 - q.1)));
    match widest {
        Some((j, lo, hi)) => {
            let nb = 0.5 * (lo + hi);
            (y[j] - nb * (j + 1) as f64, nb)
        }
        None => (a, b),
    }
}

/// Extrapolates the fitted τ-quantile line to `t = n+1..=n+h`.
pub fn quantile_trend(y: &[f64], h: usize, tau: f64) -> Option<Vec<f64>> {
    let fit = fit_quantile_line(y, tau)?;
    let n = y.len();
    Some((1..=h).map(|k| fit.a + fit.b * (n + k) as f64).collect())
}
