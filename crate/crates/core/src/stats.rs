//! Small numerical helpers shared across the crate.

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population variance (divides by n).
pub fn var_pop(x: &[f64]) -> f64 {
    let mu = mean(x);
    x.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / x.len() as f64
}

/// Sample variance (divides by n - 1).
pub fn var(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return f64::NAN;
    }
    let mu = mean(x);
    x.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

pub fn sd(x: &[f64]) -> f64 {
    var(x).sqrt()
}

/// Pearson correlation; 0 when either side has no spread.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
}

pub fn sorted(x: &[f64]) -> Vec<f64> {
    let mut s = x.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    s
}

pub fn median(x: &[f64]) -> f64 {
    quantile_sorted(&sorted(x), 0.5)
}

/// Linear-interpolation quantile of an already sorted slice (R type 7).
pub fn quantile_sorted(s: &[f64], p: f64) -> f64 {
    if s.is_empty() {
        return f64::NAN;
    }
    let pos = p.clamp(0.0, 1.0) * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        s[lo]
    } else {
        s[lo] + frac * (s[hi] - s[lo])
    }
}

pub fn diff(x: &[f64], lag: usize) -> Vec<f64> {
    if x.len() <= lag {
        return Vec::new();
    }
    (lag..x.len()).map(|t| x[t] - x[t - lag]).collect()
}

/// Sample autocorrelations at lags 1..=max_lag. Lags beyond the data are NaN.
pub fn acf(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let mu = mean(x);
    let denom: f64 = x.iter().map(|v| (v - mu).powi(2)).sum();
    (1..=max_lag)
        .map(|k| {
            if k >= n || denom <= 0.0 {
                return f64::NAN;
            }
            let num: f64 = (k..n).map(|t| (x[t] - mu) * (x[t - k] - mu)).sum();
            num / denom
        })
        .collect()
}

/// Partial autocorrelations at lags 1..=max_lag via Durbin-Levinson.
pub fn pacf(x: &[f64], max_lag: usize) -> Vec<f64> {
    let r = acf(x, max_lag);
    let mut out = Vec::with_capacity(max_lag);
    let mut phi: Vec<f64> = Vec::new();
    for k in 1..=max_lag {
        let rk = r[k - 1];
        if !rk.is_finite() {
            out.push(f64::NAN);
            continue;
        }
        let (num, den) = phi.iter().enumerate().fold((rk, 1.0), |(num, den), (j, p)| {
            (num - p * r[k - 2 - j], den - p * r[j])
        });
        let a = if den.abs() < 1e-300 { f64::NAN } else { num / den };
        if !a.is_finite() {
            out.push(f64::NAN);
            break;
        }
        let prev = phi.clone();
        for j in 0..phi.len() {
            phi[j] = prev[j] - a * prev[prev.len() - 1 - j];
        }
        phi.push(a);
        out.push(a);
    }
    out.resize(max_lag, f64::NAN);
    out
}

/// Result of an ordinary least-squares fit.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coef: Vec<f64>,
    pub residuals: Vec<f64>,
    pub sse: f64,
}

fn full_rank_qr(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<DVector<f64>> {
    if x.nrows() < x.ncols() {
        return None;
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let diag = r.diagonal();
    let largest = diag.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
    if largest.is_nan() || largest <= 0.0 || diag.iter().any(|d| d.abs() <= 1e-10 * largest) {
        return None;
    }
    r.solve_upper_triangular(&(qr.q().transpose() * y))
}

/// Least squares of `y` on the columns of `design` (rows = observations).
/// Householder QR for full-rank designs; the SVD minimum-norm solution
/// when the design is (numerically) rank deficient.
pub fn lstsq(design: &[Vec<f64>], y: &[f64]) -> Option<LeastSquares> {
    let n = y.len();
    if n == 0 || design.len() != n {
        return None;
    }
    let p = design[0].len();
    let x = DMatrix::from_fn(n, p, |i, j| design[i][j]);
    let yv = DVector::from_column_slice(y);
    let coef = full_rank_qr(&x, &yv).or_else(|| x.clone().svd(true, true).solve(&yv, 1e-12).ok())?;
    let fitted = &x * &coef;
    let residuals: Vec<f64> = (0..n).map(|i| y[i] - fitted[i]).collect();
    let sse = residuals.iter().map(|r| r * r).sum();
    let coef: Vec<f64> = coef.iter().copied().collect();
    if coef.iter().any(|c| !c.is_finite()) {
        return None;
    }
    Some(LeastSquares {
        coef,
        residuals,
        sse,
    })
}

/// Coefficient of determination of a fit against its response.
pub fn r_squared(y: &[f64], sse: f64) -> f64 {
    let mu = mean(y);
    let sst: f64 = y.iter().map(|v| (v - mu).powi(2)).sum();
    if sst <= 0.0 {
        return f64::NAN;
    }
    1.0 - sse / sst
}

/// Upper-tail probability P(T > t) for Student's t with `dof` degrees of freedom.
pub fn t_upper_tail(t: f64, dof: f64) -> f64 {
    if t.is_nan() || dof <= 0.0 {
        return f64::NAN;
    }
    if t == f64::INFINITY {
        return 0.0;
    }
    if t == f64::NEG_INFINITY {
        return 1.0;
    }
    let dist = StudentsT::new(0.0, 1.0, dof).expect("positive degrees of freedom");
    dist.sf(t)
}

/// One-sample t test of `x` against `mu0`.
///
/// Returns `(t, p_one_sided_upper, p_two_sided)`. When the sample has no
/// spread the p-values follow the conventions documented at the call sites:
/// a zero mean difference gives p = 1, a nonzero one gives the smallest
/// positive float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub p_upper: f64,
    pub p_two_sided: f64,
}

pub fn t_test(x: &[f64], mu0: f64) -> TTest {
    let n = x.len();
    if n < 2 {
        return TTest {
            t: 0.0,
            p_upper: 1.0,
            p_two_sided: 1.0,
        };
    }
    let m = mean(x) - mu0;
    let s = sd(x);
    if s == 0.0 || !s.is_finite() {
        if m == 0.0 {
            return TTest {
                t: 0.0,
                p_upper: 1.0,
                p_two_sided: 1.0,
            };
        }
        let p_upper = if m > 0.0 { f64::MIN_POSITIVE } else { 1.0 };
        return TTest {
            t: m.signum() * f64::INFINITY,
            p_upper,
            p_two_sided: f64::MIN_POSITIVE,
        };
    }
    let t = m / (s / (n as f64).sqrt());
    let dof = (n - 1) as f64;
    let p_upper = t_upper_tail(t, dof).max(f64::MIN_POSITIVE);
    let p_two_sided = (2.0 * t_upper_tail(t.abs(), dof)).clamp(f64::MIN_POSITIVE, 1.0);
    TTest {
        t,
        p_upper,
        p_two_sided,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_match_r_type7() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.5), 2.5);
        assert_eq!(quantile_sorted(&s, 0.0), 1.0);
        assert_eq!(quantile_sorted(&s, 1.0), 4.0);
        assert!((quantile_sorted(&s, 0.25) - 1.75).abs() < 1e-15);
    }

    #[test]
    fn pacf_of_ar1_acf_cuts_off() {
        // acf of AR(1) with phi: pacf(1) = acf(1); pacf(2) from Durbin-Levinson
        let x: Vec<f64> = (0..50).map(|t| ((t as f64) * 0.7).sin() + 0.1 * t as f64).collect();
        let r = acf(&x, 3);
        let p = pacf(&x, 3);
        assert!((p[0] - r[0]).abs() < 1e-12);
        let expected = (r[1] - r[0] * r[0]) / (1.0 - r[0] * r[0]);
        assert!((p[1] - expected).abs() < 1e-12);
    }

    #[test]
    fn lstsq_recovers_exact_line() {
        let design: Vec<Vec<f64>> = (0..10).map(|t| vec![1.0, t as f64]).collect();
        let y: Vec<f64> = (0..10).map(|t| 3.0 - 0.5 * t as f64).collect();
        let fit = lstsq(&design, &y).unwrap();
        assert!((fit.coef[0] - 3.0).abs() < 1e-10);
        assert!((fit.coef[1] + 0.5).abs() < 1e-10);
        assert!(fit.sse < 1e-18);
    }

    #[test]
    fn lstsq_is_backward_stable_on_lagged_designs() {
        // Pseudo-random lag regression: perturbing y by one ulp must not
        // move the coefficients by more than conditioning allows.
        let mut state = 7u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let x: Vec<f64> = (0..90).map(|_| (next() * 3.0).powi(2)).collect();
        let design: Vec<Vec<f64>> = (12..90).map(|t| std::iter::once(1.0).chain((1..=12).map(|k| x[t - k])).collect()).collect();
        let y = &x[12..];
        let nudged: Vec<f64> = y.iter().map(|v| v * (1.0 + f64::EPSILON)).collect();
        let a = lstsq(&design, y).unwrap();
        let b = lstsq(&design, &nudged).unwrap();
        for (u, v) in a.coef.iter().zip(&b.coef) {
            assert!((u - v).abs() < 1e-12, "{u} vs {v}");
        }
        let rank_deficient: Vec<Vec<f64>> = (0..6).map(|t| vec![1.0, t as f64, 2.0 * t as f64]).collect();
        let fit = lstsq(&rank_deficient, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert!(fit.sse < 1e-18);
    }

    #[test]
    fn t_test_conventions() {
        assert_eq!(t_test(&[0.0, 0.0, 0.0], 0.0).p_upper, 1.0);
        let r = t_test(&[1.0, 1.1, 0.9, 1.05, 0.95], 0.0);
        assert!(r.t > 10.0);
        assert!(r.p_upper < 1e-4);
        assert!(r.p_two_sided < 2e-4);
    }
}
