//! Discretised Ornstein-Uhlenbeck mean reversion `dS = γ(m − S)dt + σ dZ`.

use serde::{Deserialize, Serialize};

use crate::stats::lstsq;

/// Fitted reversion speed, long-run level and diffusion scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuParams {
    pub gamma: f64,
    pub m_level: f64,
    pub sigma: f64,
}

/// Least-squares fit of `Δy_t = γ(m − y_{t−1}) + ε_t`, with `γ` clamped to
/// `[0, 1]`. When the regression is degenerate (constant series) or `γ`
/// clamps to zero, the level falls back to the sample mean.
pub fn fit_ou(y: &[f64]) -> Option<OuParams> {
    let n = y.len();
    if n < 3 {
        return None;
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let lagged = &y[..n - 1];
    let lag_mean = lagged.iter().sum::<f64>() / (n - 1) as f64;
    if lagged.iter().all(|v| (v - lag_mean).abs() <= 1e-12 * (1.0 + lag_mean.abs())) {
        return Some(OuParams {
            gamma: 0.0,
            m_level: mean,
            sigma: 0.0,
        });
    }
    let design: Vec<Vec<f64>> = lagged.iter().map(|v| vec![1.0, *v]).collect();
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let fit = lstsq(&design, &dy)?;
    let (c, phi) = (fit.coef[0], fit.coef[1]);
    let raw_gamma = -phi;
    if !raw_gamma.is_finite() {
        return None;
    }
    let gamma = raw_gamma.clamp(0.0, 1.0);
    let m_level = if gamma > 0.0 { c / raw_gamma } else { mean };
    let sigma = (fit.sse / (n - 1) as f64).sqrt();
    Some(OuParams {
        gamma,
        m_level,
        sigma,
    })
}

impl OuParams {
    /// Deterministic expectation path from `last` (the noise term is dropped).
    pub fn expectation_path(&self, last: f64, h: usize) -> Vec<f64> {
        let mut y = last;
        (0..h)
            .map(|_| {
                y += self.gamma * (self.m_level - y);
                y
            })
            .collect()
    }
}

pub fn ou_forecast(y: &[f64], h: usize) -> Option<Vec<f64>> {
    let params = fit_ou(y)?;
    Some(params.expectation_path(*y.last()?, h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series() {
        let p = fit_ou(&[2.5; 20]).unwrap();
        assert_eq!(p.m_level, 2.5);
        assert_eq!(ou_forecast(&[2.5; 20], 4).unwrap(), vec![2.5; 4]);
    }

    #[test]
    fn approaches_level_monotonically() {
        let mut y: Vec<f64> = (0..40).map(|t| 10.0 + (t as f64 * 1.3).sin()).collect();
        y.push(2.0);
        let p = fit_ou(&y).unwrap();
        assert!(p.gamma > 0.0 && p.gamma < 1.0);
        let f = ou_forecast(&y, 18).unwrap();
        let dist: Vec<f64> = f.iter().map(|v| (v - p.m_level).abs()).collect();
        assert!(dist.windows(2).all(|w| w[1] <= w[0]));
        assert!(f.windows(2).all(|w| w[1] >= w[0]));
    }
}
