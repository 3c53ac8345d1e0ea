//! Simple, Holt and additive Holt-Winters exponential smoothing with
//! smoothing rates chosen by an in-sample SSE grid search.

/// Grid for the single SES rate.
fn ses_grid() -> impl Iterator<Item = f64> {
    (1..=50).map(|i| i as f64 * 0.02)
}

/// Grid shared by Holt and Holt-Winters rates.
fn rate_grid() -> impl Iterator<Item = f64> + Clone {
    (1..=9).map(|i| i as f64 * 0.1)
}

/// A fitted smoothing model: chosen rates plus the final state.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingFit {
    pub alpha: f64,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub level: f64,
    pub trend: f64,
    /// Seasonal state indexed by absolute phase `t % m`; empty when non-seasonal.
    pub seasonal: Vec<f64>,
    pub n: usize,
    pub sse: f64,
}

impl SmoothingFit {
    pub fn forecast(&self, h: usize) -> Vec<f64> {
        (1..=h)
            .map(|k| {
                let s = if self.seasonal.is_empty() {
                    0.0
                } else {
                    self.seasonal[(self.n - 1 + k) % self.seasonal.len()]
                };
                self.level + k as f64 * self.trend + s
            })
            .collect()
    }
}

fn ses_run(y: &[f64], alpha: f64, bound: f64) -> Option<(f64, f64)> {
    let mut level = y[0];
    let mut sse = 0.0;
    for &v in &y[1..] {
        let e = v - level;
        sse += e * e;
        if sse > bound {
            return None;
        }
        level += alpha * e;
    }
    Some((sse, level))
}

/// Simple exponential smoothing, level initialised at the first value.
pub fn fit_ses(y: &[f64]) -> Option<SmoothingFit> {
    if y.len() < 2 {
        return None;
    }
    let mut best: Option<SmoothingFit> = None;
    for alpha in ses_grid() {
        let bound = best.as_ref().map_or(f64::INFINITY, |b| b.sse);
        if let Some((sse, level)) = ses_run(y, alpha, bound) {
            if sse < bound {
                best = Some(SmoothingFit {
                    alpha,
                    beta: None,
                    gamma: None,
                    level,
                    trend: 0.0,
                    seasonal: Vec::new(),
                    n: y.len(),
                    sse,
                });
            }
        }
    }
    best
}

/// Runs Holt's linear method at fixed rates; returns `(sse, level, trend)`
/// or `None` once the SSE exceeds `bound`.
pub fn holt_run(y: &[f64], alpha: f64, beta: f64, bound: f64) -> Option<(f64, f64, f64)> {
    let mut level = y[0];
    let mut trend = y[1] - y[0];
    let mut sse = 0.0;
    for &v in &y[1..] {
        let pred = level + trend;
        let e = v - pred;
        sse += e * e;
        if sse > bound {
            return None;
        }
        let new_level = pred + alpha * e;
        trend += beta * (new_level - level - trend);
        level = new_level;
    }
    Some((sse, level, trend))
}

/// Holt's linear trend method.
pub fn fit_holt(y: &[f64]) -> Option<SmoothingFit> {
    if y.len() < 3 {
        return None;
    }
    let mut best: Option<SmoothingFit> = None;
    for alpha in rate_grid() {
        for beta in rate_grid() {
            let bound = best.as_ref().map_or(f64::INFINITY, |b| b.sse);
            if let Some((sse, level, trend)) = holt_run(y, alpha, beta, bound) {
                if sse < bound && level.is_finite() && trend.is_finite() {
                    best = Some(SmoothingFit {
                        alpha,
                        beta: Some(beta),
                        gamma: None,
                        level,
                        trend,
                        seasonal: Vec::new(),
                        n: y.len(),
                        sse,
                    });
                }
            }
        }
    }
    best
}

/// Seasonal start state from the first two seasons: level and trend at the
/// end of the first season, seasonal offsets about the within-season line.
pub(crate) fn seasonal_init(y: &[f64], m: usize) -> (f64, f64, Vec<f64>) {
    let first = y[..m].iter().sum::<f64>() / m as f64;
    let second = y[m..2 * m].iter().sum::<f64>() / m as f64;
    let trend = (second - first) / m as f64;
    let centre = (m as f64 - 1.0) / 2.0;
    let seasonal = (0..m)
        .map(|i| y[i] - (first + trend * (i as f64 - centre)))
        .collect();
    (first + trend * centre, trend, seasonal)
}

#[allow(clippy::too_many_arguments)]
fn hw_run(
    y: &[f64],
    m: usize,
    init: &(f64, f64, Vec<f64>),
    seasonal: &mut [f64],
    alpha: f64,
    beta: f64,
    gamma: f64,
    bound: f64,
) -> Option<(f64, f64, f64)> {
    let (mut level, mut trend, ref s0) = *init;
    seasonal.copy_from_slice(s0);
    let mut sse = 0.0;
    for (t, &v) in y.iter().enumerate().skip(m) {
        let p = t % m;
        let base = level + trend;
        let e = v - base - seasonal[p];
        sse += e * e;
        if sse > bound {
            return None;
        }
        let new_level = alpha * (v - seasonal[p]) + (1.0 - alpha) * base;
        trend = beta * (new_level - level) + (1.0 - beta) * trend;
        seasonal[p] = gamma * (v - new_level) + (1.0 - gamma) * seasonal[p];
        level = new_level;
    }
    Some((sse, level, trend))
}

/// Additive Holt-Winters. Needs `m > 1` and two full seasons; otherwise
/// this is Holt's method with `gamma = None`.
pub fn fit_holt_winters(y: &[f64], m: usize) -> Option<SmoothingFit> {
    if m < 2 || y.len() < 2 * m + 1 {
        return fit_holt(y);
    }
    let init = seasonal_init(y, m);
    let mut scratch = vec![0.0; m];
    let mut best: Option<SmoothingFit> = None;
    for alpha in rate_grid() {
        for beta in rate_grid() {
            for gamma in rate_grid() {
                let bound = best.as_ref().map_or(f64::INFINITY, |b| b.sse);
                if let Some((sse, level, trend)) =
                    hw_run(y, m, &init, &mut scratch, alpha, beta, gamma, bound)
                {
                    if sse < bound && level.is_finite() && trend.is_finite() {
                        best = Some(SmoothingFit {
                            alpha,
                            beta: Some(beta),
                            gamma: Some(gamma),
                            level,
                            trend,
                            seasonal: scratch.clone(),
                            n: y.len(),
                            sse,
                        });
                    }
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ses_constant() {
        let f = fit_ses(&[3.0; 10]).unwrap();
        assert_eq!(f.forecast(4), vec![3.0; 4]);
    }

    #[test]
    fn holt_exact_line() {
        let y: Vec<f64> = (0..20).map(|t| 2.0 + 0.5 * t as f64).collect();
        let f = fit_holt(&y).unwrap();
        let fc = f.forecast(3);
        for (k, v) in fc.iter().enumerate() {
            assert!((v - (2.0 + 0.5 * (20 + k) as f64)).abs() < 1e-9);
        }
    }

    #[test]
    fn holt_winters_continues_exact_pattern() {
        let pattern = [3.0, -1.0, 0.5, -2.5];
        let truth = |t: usize| 10.0 + 0.7 * t as f64 + pattern[t % 4];
        let y: Vec<f64> = (0..32).map(truth).collect();
        let f = fit_holt_winters(&y, 4).unwrap();
        for (k, v) in f.forecast(8).iter().enumerate() {
            assert!((v - truth(32 + k)).abs() < 1e-6, "step {k}: {v}");
        }
    }

    #[test]
    fn holt_winters_nonseasonal_is_holt() {
        let y: Vec<f64> = (0..15).map(|t| (t as f64).sin() + t as f64).collect();
        assert_eq!(fit_holt_winters(&y, 1), fit_holt(&y));
    }
}
