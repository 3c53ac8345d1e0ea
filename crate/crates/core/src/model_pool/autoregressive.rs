use crate::decompose::{classical, Form};
use crate::stats::lstsq;

pub const MAX_AR_ORDER: usize = 5;

/// Least-squares AR(p) with intercept: `y_t = c + Σ φ_k y_{t−k} + ε_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArFit {
    pub p: usize,
    pub intercept: f64,
    pub phi: Vec<f64>,
    pub sigma2: f64,
    pub aic: f64,
}

impl ArFit {
    /// Recursive multi-step forecast continuing `history`.
    pub fn forecast(&self, history: &[f64], h: usize) -> Vec<f64> {
        let mut buf: Vec<f64> = history[history.len().saturating_sub(self.p)..].to_vec();
        let mut out = Vec::with_capacity(h);
        for _ in 0..h {
            let len = buf.len();
            let v = self.intercept
                + self
                    .phi
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * buf[len - 1 - k])
                    .sum::<f64>();
            out.push(v);
            buf.push(v);
        }
        out
    }

    /// One-step in-sample residuals for `t >= p`.
    pub fn residuals(&self, y: &[f64]) -> Vec<f64> {
        (self.p..y.len())
            .map(|t| {
                let pred = self.intercept
                    + self
                        .phi
                        .iter()
                        .enumerate()
                        .map(|(k, c)| c * y[t - 1 - k])
                        .sum::<f64>();
                y[t] - pred
            })
            .collect()
    }
}

fn fit_order(y: &[f64], p: usize, start: usize) -> Option<ArFit> {
    let rows = y.len() - start;
    let design: Vec<Vec<f64>> = (start..y.len())
        .map(|t| {
            let mut row = Vec::with_capacity(p + 1);
            row.push(1.0);
            row.extend((1..=p).map(|k| y[t - k]));
            row
        })
        .collect();
    let fit = lstsq(&design, &y[start..])?;
    let sigma2 = fit.sse / rows as f64;
    let aic = rows as f64 * sigma2.max(1e-300).ln() + 2.0 * (p + 1) as f64;
    Some(ArFit {
        p,
        intercept: fit.coef[0],
        phi: fit.coef[1..].to_vec(),
        sigma2,
        aic,
    })
}

/// Chooses `p ∈ 0..=5` by AIC on a common estimation sample.
pub fn ar_aic(y: &[f64]) -> Option<ArFit> {
    let n = y.len();
    if n < 3 {
        return None;
    }
    // Keep at least three observations per parameter.
    let max_p = MAX_AR_ORDER.min((n.saturating_sub(1)) / 3);
    let start = max_p;
    let mut best: Option<ArFit> = None;
    for p in 0..=max_p {
        if let Some(fit) = fit_order(y, p, start) {
            if best.as_ref().is_none_or(|b| fit.aic < b.aic - 1e-12) {
                best = Some(fit);
            }
        }
    }
    // Refit the chosen order on the full usable sample.
    let p = best?.p;
    fit_order(y, p, p).filter(|f| f.phi.iter().all(|c| c.is_finite()))
}

/// Classical additive decomposition, AR on the seasonally adjusted series
/// and the seasonal indices added back. Without a usable seasonal period
/// the AR model is fitted to first differences and integrated.
pub fn decompose_ar(y: &[f64], m: usize, h: usize) -> Option<Vec<f64>> {
    let n = y.len();
    if let Some(dec) = classical(y, m, Form::Additive) {
        let adjusted: Vec<f64> = y.iter().zip(&dec.seasonal).map(|(v, s)| v - s).collect();
        let fit = ar_aic(&adjusted)?;
        return Some(
            fit.forecast(&adjusted, h)
                .into_iter()
                .enumerate()
                .map(|(k, v)| v + dec.index_at(n + k))
                .collect(),
        );
    }
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let fit = ar_aic(&dy)?;
    let mut level = y[n - 1];
    Some(
        fit.forecast(&dy, h)
            .into_iter()
            .map(|d| {
                level += d;
                level
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ar_forecast_recursion() {
        let fit = ArFit {
            p: 1,
            intercept: 1.0,
            phi: vec![0.5],
            sigma2: 0.0,
            aic: 0.0,
        };
        assert_eq!(fit.forecast(&[4.0], 3), vec![3.0, 2.5, 2.25]);
    }

    #[test]
    fn decompose_ar_keeps_seasonal_shape() {
        let pattern = [2.0, -1.0, -2.0, 1.0];
        let y: Vec<f64> = (0..40)
            .map(|t| 20.0 + pattern[t % 4] + 0.01 * ((t * 7) % 5) as f64)
            .collect();
        let f = decompose_ar(&y, 4, 4).unwrap();
        let argmax = f
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!((40 + argmax) % 4, 0);
    }
}
