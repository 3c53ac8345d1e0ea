//! The 42 statistical series features fed to the weighting network.
//!
//! Most features are computed on the z-scored series, so they are
//! unchanged by positive affine maps of the data. Features that cannot be
//! computed for a series (too short, constant, no seasonal period, an
//! optimiser failure) are imputed as 0 and flagged in
//! [`StatFeatures::missing`].

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::decompose::{centred_moving_average, classical, Form};
use crate::model_pool::{ar_aic, fit_holt, fit_holt_winters};
use crate::stats::{acf, diff, lstsq, mean, median, pacf, quantile_sorted, r_squared, sorted, var};

pub const N_STAT_FEATURES: usize = 42;

/// Canonical feature names in output order.
pub const STAT_FEATURE_NAMES: [&str; N_STAT_FEATURES] = [
    "x_acf1",
    "x_acf10",
    "diff1_acf1",
    "diff1_acf10",
    "diff2_acf1",
    "diff2_acf10",
    "x_pacf5",
    "diff1x_pacf5",
    "diff2x_pacf5",
    "seas_acf1",
    "seas_pacf",
    "entropy",
    "lumpiness",
    "stability",
    "flat_spots",
    "cross_ps",
    "hurst",
    "unitroot_kpss",
    "unitroot_pp",
    "nonlinearity",
    "arch_acf",
    "garch_acf",
    "arch_r2",
    "garch_r2",
    "ARCH.LM",
    "trend",
    "spike",
    "linearity",
    "curvature",
    "e_acf1",
    "e_acf10",
    "seas_str",
    "peak",
    "trough",
    "hw_alpha",
    "hw_beta",
    "hw_gamma",
    "alpha",
    "beta",
    "nperiods",
    "seas_per",
    "s_len",
];

/// Features that depend on the level or scale of the series (or only on
/// its length and period); every other feature is affine invariant.
pub const SCALE_DEPENDENT_FEATURES: [&str; 8] = [
    "s_len",
    "seas_per",
    "nperiods",
    "linearity",
    "curvature",
    "spike",
    "lumpiness",
    "stability",
];

/// Feature values in canonical order, with per-feature imputation flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatFeatures {
    pub values: Vec<f64>,
    pub missing: Vec<bool>,
}

impl StatFeatures {
    pub fn get(&self, name: &str) -> Option<f64> {
        STAT_FEATURE_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.values[i])
    }
}

struct Builder {
    values: [f64; N_STAT_FEATURES],
    missing: [bool; N_STAT_FEATURES],
}

impl Builder {
    fn new() -> Self {
        Builder {
            values: [0.0; N_STAT_FEATURES],
            missing: [true; N_STAT_FEATURES],
        }
    }

    fn set(&mut self, name: &str, v: Option<f64>) {
        let i = STAT_FEATURE_NAMES
            .iter()
            .position(|n| *n == name)
            .unwrap_or_else(|| panic!("unknown feature {name}"));
        match v {
            Some(v) if v.is_finite() => {
                self.values[i] = v;
                self.missing[i] = false;
            }
            _ => {
                self.values[i] = 0.0;
                self.missing[i] = true;
            }
        }
    }

    fn finish(self) -> StatFeatures {
        StatFeatures {
            values: self.values.to_vec(),
            missing: self.missing.to_vec(),
        }
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// (first autocorrelation, sum of squares of the first ten).
fn acf_pair(x: &[f64]) -> (Option<f64>, Option<f64>) {
    if x.len() < 3 {
        return (None, None);
    }
    let r = acf(x, 10);
    let first = finite(r[0]);
    let ten = if r.iter().all(|v| v.is_finite()) {
        Some(r.iter().map(|v| v * v).sum())
    } else {
        None
    };
    (first, ten)
}

fn pacf5(x: &[f64]) -> Option<f64> {
    if x.len() < 7 {
        return None;
    }
    let p = pacf(x, 5);
    p.iter()
        .all(|v| v.is_finite())
        .then(|| p.iter().map(|v| v * v).sum())
}

fn sum_sq_acf(x: &[f64], lags: usize) -> Option<f64> {
    if x.len() <= lags + 1 {
        return None;
    }
    let r = acf(x, lags);
    r.iter()
        .all(|v| v.is_finite())
        .then(|| r.iter().map(|v| v * v).sum())
}

/// Normalised Shannon entropy of the periodogram at frequencies 1..=n/2.
fn spectral_entropy(z: &[f64]) -> Option<f64> {
    let n = z.len();
    if n < 8 {
        return None;
    }
    let mu = mean(z);
    let mut buf: Vec<Complex<f64>> = z.iter().map(|v| Complex::new(v - mu, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let power: Vec<f64> = buf[1..=n / 2].iter().map(|c| c.norm_sqr()).collect();
    let total: f64 = power.iter().sum();
    if total <= 0.0 || power.len() < 2 {
        return None;
    }
    let h: f64 = power
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| {
            let q = p / total;
            -q * q.ln()
        })
        .sum();
    Some(h / (power.len() as f64).ln())
}

/// (lumpiness, stability) over non-overlapping tiles of width 10.
fn tiled(z: &[f64]) -> (Option<f64>, Option<f64>) {
    let tiles: Vec<&[f64]> = z.chunks(10).filter(|c| c.len() >= 2).collect();
    if tiles.len() < 2 {
        return (None, None);
    }
    let vars: Vec<f64> = tiles.iter().map(|c| var(c)).collect();
    let means: Vec<f64> = tiles.iter().map(|c| mean(c)).collect();
    (finite(var(&vars)), finite(var(&means)))
}

/// Longest run of consecutive observations in the same decile bin.
fn flat_spots(z: &[f64]) -> Option<f64> {
    if z.len() < 10 {
        return None;
    }
    let s = sorted(z);
    let breaks: Vec<f64> = (1..10).map(|k| quantile_sorted(&s, k as f64 / 10.0)).collect();
    let bin = |v: f64| breaks.iter().filter(|b| v > **b).count();
    let (mut best, mut run, mut prev) = (1usize, 1usize, bin(z[0]));
    for &v in &z[1..] {
        let b = bin(v);
        if b == prev {
            run += 1;
            best = best.max(run);
        } else {
            run = 1;
            prev = b;
        }
    }
    Some(best as f64)
}

fn median_crossings(z: &[f64]) -> f64 {
    let med = median(z);
    z.windows(2)
        .filter(|w| (w[0] <= med) != (w[1] <= med))
        .count() as f64
}

/// Hurst exponent from the slope of log mean R/S against log window size.
fn hurst(z: &[f64]) -> Option<f64> {
    let n = z.len();
    let mut points = Vec::new();
    let mut w = 8;
    while w <= n / 2 {
        let mut rs = Vec::new();
        for chunk in z.chunks_exact(w) {
            let mu = mean(chunk);
            let mut acc = 0.0;
            let (mut lo, mut hi) = (0.0f64, 0.0f64);
            for v in chunk {
                acc += v - mu;
                lo = lo.min(acc);
                hi = hi.max(acc);
            }
            let sd = (chunk.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / w as f64).sqrt();
            if sd > 0.0 {
                rs.push((hi - lo) / sd);
            }
        }
        if !rs.is_empty() {
            points.push(((w as f64).ln(), mean(&rs).ln()));
        }
        w *= 2;
    }
    if points.len() < 2 {
        return None;
    }
    let design: Vec<Vec<f64>> = points.iter().map(|p| vec![1.0, p.0]).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    lstsq(&design, &y).map(|f| f.coef[1])
}

fn newey_west_lag(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Bartlett-weighted long-run variance of `e` (assumed mean zero).
fn long_run_variance(e: &[f64], lags: usize) -> f64 {
    let n = e.len() as f64;
    let mut s = e.iter().map(|v| v * v).sum::<f64>() / n;
    for lag in 1..=lags.min(e.len().saturating_sub(1)) {
        let w = 1.0 - lag as f64 / (lags as f64 + 1.0);
        let g: f64 = (lag..e.len()).map(|t| e[t] * e[t - lag]).sum::<f64>() / n;
        s += 2.0 * w * g;
    }
    s
}

/// KPSS level-stationarity statistic.
fn kpss(z: &[f64]) -> Option<f64> {
    let n = z.len();
    if n < 4 {
        return None;
    }
    let mu = mean(z);
    let e: Vec<f64> = z.iter().map(|v| v - mu).collect();
    let mut cum = 0.0;
    let eta: f64 = e
        .iter()
        .map(|v| {
            cum += v;
            cum * cum
        })
        .sum::<f64>()
        / (n as f64).powi(2);
    let s2 = long_run_variance(&e, newey_west_lag(n));
    (s2 > 0.0).then(|| eta / s2)
}

/// Phillips-Perron Z(α) statistic for a unit root with drift.
fn phillips_perron(z: &[f64]) -> Option<f64> {
    let n = z.len();
    if n < 6 {
        return None;
    }
    let design: Vec<Vec<f64>> = z[..n - 1].iter().map(|v| vec![1.0, *v]).collect();
    let fit = lstsq(&design, &z[1..])?;
    let t = (n - 1) as f64;
    let rho = fit.coef[1];
    let s2 = fit.sse / (t - 2.0);
    let lag_mean = mean(&z[..n - 1]);
    let sxx: f64 = z[..n - 1].iter().map(|v| (v - lag_mean).powi(2)).sum();
    if sxx <= 0.0 || s2 <= 0.0 {
        return None;
    }
    let var_rho = s2 / sxx;
    let gamma0 = fit.sse / t;
    let lambda2 = long_run_variance(&fit.residuals, newey_west_lag(n));
    Some(t * (rho - 1.0) - 0.5 * (t * t * var_rho / s2) * (lambda2 - gamma0))
}

/// F statistic comparing a lag-1 linear autoregression with one that adds
/// quadratic and cubic lag terms.
fn nonlinearity(z: &[f64]) -> Option<f64> {
    let n = z.len();
    if n < 10 {
        return None;
    }
    let lin: Vec<Vec<f64>> = z[..n - 1].iter().map(|v| vec![1.0, *v]).collect();
    let cubic: Vec<Vec<f64>> = z[..n - 1]
        .iter()
        .map(|v| vec![1.0, *v, v * v, v * v * v])
        .collect();
    let sse0 = lstsq(&lin, &z[1..])?.sse;
    let sse1 = lstsq(&cubic, &z[1..])?.sse;
    let dof = (n - 1) as f64 - 4.0;
    if sse1 <= 1e-12 * sse0.max(1e-300) {
        return None;
    }
    Some(((sse0 - sse1) / 2.0) / (sse1 / dof))
}

/// R² of `x_t` regressed on its previous `lags` values.
fn lag_regression_r2(x: &[f64], lags: usize) -> Option<(f64, usize)> {
    let n = x.len();
    if n < 2 * lags + 2 {
        return None;
    }
    let design: Vec<Vec<f64>> = (lags..n)
        .map(|t| {
            let mut row = vec![1.0];
            row.extend((1..=lags).map(|k| x[t - k]));
            row
        })
        .collect();
    let y = &x[lags..];
    let fit = lstsq(&design, y)?;
    Some((r_squared(y, fit.sse), y.len()))
}

/// Gaussian GARCH(1,1) conditional variances with variance targeting
/// (`ω = (1 − α − β)·mean(r²)`), fitted by a grid over `(α, β)` and a
/// compass search on the log-likelihood. `r` should have unit variance.
fn garch11(r: &[f64]) -> Option<Vec<f64>> {
    const PERSISTENCE_CAP: f64 = 0.999;
    let n = r.len();
    if n < 20 {
        return None;
    }
    let r2: Vec<f64> = r.iter().map(|v| v * v).collect();
    let target = mean(&r2).max(1e-12);
    let log_lik = |alpha: f64, beta: f64| -> f64 {
        let omega = (1.0 - alpha - beta) * target;
        let mut s2 = target;
        let mut ll = 0.0;
        for t in 0..n {
            if t > 0 {
                s2 = omega + alpha * r2[t - 1] + beta * s2;
            }
            let s2c = s2.max(1e-12);
            ll -= 0.5 * (s2c.ln() + r2[t] / s2c);
        }
        ll
    };
    let feasible = |a: f64, b: f64| a >= 0.0 && b >= 0.0 && a + b <= PERSISTENCE_CAP;
    let climb = |(mut ll, mut alpha, mut beta): (f64, f64, f64)| {
        let mut step = 0.05;
        for _ in 0..10_000 {
            if step < 1e-10 {
                break;
            }
            let mut moved = false;
            for (da, db) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step), (step, -step), (-step, step)] {
                let (a, b) = (alpha + da, beta + db);
                if !feasible(a, b) {
                    continue;
                }
                let cand = log_lik(a, b);
                if cand > ll {
                    (ll, alpha, beta) = (cand, a, b);
                    moved = true;
                    break;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        (ll, alpha, beta)
    };
    // At α = 0 the likelihood does not depend on β, so the grid starts
    // slightly inside the region to keep the starting points distinct.
    let mut grid = Vec::new();
    for a in [0.02, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
        for j in 0..10 {
            let b = 0.1 * j as f64;
            if feasible(a, b) {
                grid.push((log_lik(a, b), a, b));
            }
        }
    }
    grid.retain(|g| g.0.is_finite());
    grid.sort_by(|p, q| q.0.total_cmp(&p.0));
    let (ll, alpha, beta) = grid
        .iter()
        .take(3)
        .map(|&start| climb(start))
        .max_by(|p, q| p.0.total_cmp(&q.0))?;
    if !ll.is_finite() {
        return None;
    }
    let omega = (1.0 - alpha - beta) * target;
    let mut s2 = target;
    let sig: Vec<f64> = (0..n)
        .map(|t| {
            if t > 0 {
                s2 = omega + alpha * r2[t - 1] + beta * s2;
            }
            s2.max(1e-12)
        })
        .collect();
    sig.iter().all(|v| v.is_finite()).then_some(sig)
}

/// Heterogeneity block on AR-prewhitened residuals:
/// (arch_acf, garch_acf, arch_r2, garch_r2, ARCH.LM).
fn heterogeneity(z: &[f64]) -> [Option<f64>; 5] {
    let none = [None; 5];
    let Some(ar) = ar_aic(z) else {
        return none;
    };
    let r = ar.residuals(z);
    let r_mean = mean(&r);
    let r_sd = var(&r).sqrt();
    if r_sd.is_nan() || r_sd <= 0.0 || r.len() < 26 {
        return none;
    }
    let r: Vec<f64> = r.iter().map(|v| (v - r_mean) / r_sd).collect();
    let r2: Vec<f64> = r.iter().map(|v| v * v).collect();
    let arch_acf = sum_sq_acf(&r2, 12);
    let arch = lag_regression_r2(&r2, 12);
    let arch_r2 = arch.map(|a| a.0);
    let arch_lm = arch.map(|(r2, len)| r2 * len as f64);
    let (garch_acf, garch_r2) = match garch11(&r) {
        Some(sig) => {
            let v2: Vec<f64> = r.iter().zip(&sig).map(|(v, s)| v * v / s).collect();
            (sum_sq_acf(&v2, 12), lag_regression_r2(&v2, 12).map(|a| a.0))
        }
        None => (None, None),
    };
    [arch_acf, garch_acf, arch_r2, garch_r2, arch_lm]
}

struct DecompositionBlock {
    trend: Option<f64>,
    spike: Option<f64>,
    linearity: Option<f64>,
    curvature: Option<f64>,
    e_acf1: Option<f64>,
    e_acf10: Option<f64>,
    seas_str: Option<f64>,
    peak: Option<f64>,
    trough: Option<f64>,
}

/// Width of the trend smoother for non-seasonal series.
const NONSEASONAL_WINDOW: usize = 5;

fn decomposition_block(z: &[f64], m: usize) -> DecompositionBlock {
    let n = z.len();
    let (trend_c, seasonal_c, indices) = match classical(z, m, Form::Additive) {
        Some(d) => (d.trend, Some(d.seasonal), Some(d.indices)),
        None => (
            centred_moving_average(z, NONSEASONAL_WINDOW),
            None,
            None,
        ),
    };
    let idx: Vec<usize> = (0..n).filter(|&t| trend_c[t].is_finite()).collect();
    let empty = DecompositionBlock {
        trend: None,
        spike: None,
        linearity: None,
        curvature: None,
        e_acf1: None,
        e_acf10: None,
        seas_str: None,
        peak: None,
        trough: None,
    };
    if idx.len() < 4 {
        return empty;
    }
    let season = |t: usize| seasonal_c.as_ref().map_or(0.0, |s| s[t]);
    let tr: Vec<f64> = idx.iter().map(|&t| trend_c[t]).collect();
    let e: Vec<f64> = idx.iter().map(|&t| z[t] - trend_c[t] - season(t)).collect();
    let te: Vec<f64> = tr.iter().zip(&e).map(|(a, b)| a + b).collect();
    let var_e = var(&e);
    let strength = |total: f64| (total > 0.0).then(|| (1.0 - var_e / total).max(0.0));
    let trend = strength(var(&te));
    let seas_str = seasonal_c.as_ref().and_then(|s| {
        let se: Vec<f64> = idx.iter().zip(&e).map(|(&t, r)| s[t] + r).collect();
        strength(var(&se))
    });

    // Leave-one-out variances of the remainder.
    let k = e.len() as f64;
    let (sum, sumsq) = e.iter().fold((0.0, 0.0), |(s, q), v| (s + v, q + v * v));
    let loo: Vec<f64> = e
        .iter()
        .map(|v| {
            let s = sum - v;
            (sumsq - v * v - s * s / (k - 1.0)) / (k - 2.0)
        })
        .collect();
    let spike = finite(var(&loo));

    // Orthonormal quadratic basis over the observed time points.
    let times: Vec<f64> = idx.iter().map(|&t| t as f64).collect();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for degree in 0..3 {
        let mut col: Vec<f64> = times.iter().map(|t| t.powi(degree)).collect();
        for q in &basis {
            let dot: f64 = col.iter().zip(q).map(|(a, b)| a * b).sum();
            col.iter_mut().zip(q).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        col.iter_mut().for_each(|v| *v /= norm);
        basis.push(col);
    }
    let coef = |q: &[f64]| finite(tr.iter().zip(q).map(|(a, b)| a * b).sum());
    let (e_acf1, e_acf10) = acf_pair(&e);

    let (peak, trough) = match &indices {
        Some(ix) => {
            let arg = |better: fn(f64, f64) -> bool| {
                let mut best = 0;
                for i in 1..ix.len() {
                    if better(ix[i], ix[best]) {
                        best = i;
                    }
                }
                (best + 1) as f64
            };
            (Some(arg(|a, b| a > b)), Some(arg(|a, b| a < b)))
        }
        None => (None, None),
    };

    DecompositionBlock {
        trend,
        spike,
        linearity: coef(&basis[1]),
        curvature: coef(&basis[2]),
        e_acf1,
        e_acf10,
        seas_str,
        peak,
        trough,
    }
}

/// Computes all 42 features of a training series with seasonal period `m`.
pub fn extract_stat_features(x: &[f64], m: usize) -> StatFeatures {
    let mut b = Builder::new();
    let n = x.len();
    let m = m.max(1);
    b.set("nperiods", Some(if m > 1 { 1.0 } else { 0.0 }));
    b.set("seas_per", Some(m as f64));
    b.set("s_len", Some(n as f64));

    let mu = mean(x);
    let sd = var(x).sqrt();
    if n >= 3 && sd > 0.0 && sd.is_finite() {
        let z: Vec<f64> = x.iter().map(|v| (v - mu) / sd).collect();
        let d1 = diff(&z, 1);
        let d2 = diff(&d1, 1);
        let (a1, a10) = acf_pair(&z);
        b.set("x_acf1", a1);
        b.set("x_acf10", a10);
        let (a1, a10) = acf_pair(&d1);
        b.set("diff1_acf1", a1);
        b.set("diff1_acf10", a10);
        let (a1, a10) = acf_pair(&d2);
        b.set("diff2_acf1", a1);
        b.set("diff2_acf10", a10);
        b.set("x_pacf5", pacf5(&z));
        b.set("diff1x_pacf5", pacf5(&d1));
        b.set("diff2x_pacf5", pacf5(&d2));
        if m > 1 && n > m + 1 {
            b.set("seas_acf1", finite(acf(&z, m)[m - 1]));
            b.set("seas_pacf", finite(pacf(&z, m)[m - 1]));
        }
        b.set("entropy", spectral_entropy(&z));
        let (lump, stab) = tiled(&z);
        b.set("lumpiness", lump);
        b.set("stability", stab);
        b.set("flat_spots", flat_spots(&z));
        b.set("cross_ps", Some(median_crossings(&z)));
        b.set("hurst", hurst(&z));
        b.set("unitroot_kpss", kpss(&z));
        b.set("unitroot_pp", phillips_perron(&z));
        b.set("nonlinearity", nonlinearity(&z));
        let [arch_acf, garch_acf, arch_r2, garch_r2, arch_lm] = heterogeneity(&z);
        b.set("arch_acf", arch_acf);
        b.set("garch_acf", garch_acf);
        b.set("arch_r2", arch_r2);
        b.set("garch_r2", garch_r2);
        b.set("ARCH.LM", arch_lm);
        let dec = decomposition_block(&z, m);
        b.set("trend", dec.trend);
        b.set("spike", dec.spike);
        b.set("linearity", dec.linearity);
        b.set("curvature", dec.curvature);
        b.set("e_acf1", dec.e_acf1);
        b.set("e_acf10", dec.e_acf10);
        b.set("seas_str", dec.seas_str);
        b.set("peak", dec.peak);
        b.set("trough", dec.trough);
    }

    if let Some(hw) = fit_holt_winters(x, m) {
        b.set("hw_alpha", Some(hw.alpha));
        b.set("hw_beta", hw.beta);
        b.set("hw_gamma", hw.gamma);
    }
    if let Some(holt) = fit_holt(x) {
        b.set("alpha", Some(holt.alpha));
        b.set("beta", holt.beta);
    }
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_complete() {
        let mut names = STAT_FEATURE_NAMES.to_vec();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), 42);
    }

    #[test]
    fn nonseasonal_conventions() {
        let x: Vec<f64> = (0..60).map(|t| (t as f64 * 0.37).sin() + 0.05 * t as f64).collect();
        let f = extract_stat_features(&x, 1);
        for name in ["seas_acf1", "seas_pacf", "seas_str", "hw_gamma", "nperiods", "peak", "trough"] {
            assert_eq!(f.get(name), Some(0.0), "{name}");
        }
        assert_eq!(f.get("s_len"), Some(60.0));
        assert_eq!(f.get("seas_per"), Some(1.0));
    }

    #[test]
    fn constant_series_is_all_finite() {
        let f = extract_stat_features(&[4.0; 30], 12);
        assert!(f.values.iter().all(|v| v.is_finite()));
        assert_eq!(f.get("nperiods"), Some(1.0));
    }

    #[test]
    fn kpss_small_for_white_like_and_large_for_trend() {
        let noise: Vec<f64> = (0..200).map(|t| ((t * 7919) % 97) as f64 / 97.0 - 0.5).collect();
        let trend: Vec<f64> = (0..200).map(|t| t as f64).collect();
        assert!(kpss(&noise).unwrap() < kpss(&trend).unwrap());
    }

    #[test]
    fn garch_variances_positive() {
        let r: Vec<f64> = (0..200).map(|t| ((t as f64) * 1.7).sin()).collect();
        let sd = var(&r).sqrt();
        let r: Vec<f64> = r.iter().map(|v| v / sd).collect();
        let sig = garch11(&r).unwrap();
        assert!(sig.iter().all(|s| *s > 0.0));
    }
}
