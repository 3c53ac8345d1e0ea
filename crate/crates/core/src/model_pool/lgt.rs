//! Point-estimate local and global trend (LGT) smoother.
//!
//! Measurement `y_t = μ_t + s_t + ε_t` with transition
//! `μ_t = l_{t−1} + ξ1·b_{t−1} + ξ2·l_{t−1}^λ`. Level, local trend and
//! additive seasonality follow exponential-smoothing updates. The
//! parameters are the in-sample SSE minimiser over a fixed lattice,
//! searched exhaustively with branch-and-bound on the running SSE.

use serde::{Deserialize, Serialize};

use super::smoothing::seasonal_init;

/// Lattice values for ξ1, ξ2 and λ.
pub const LGT_SHAPE: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
/// Lattice values for the level, trend and seasonal smoothing rates.
pub const LGT_RATES: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// One lattice point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LgtConfig {
    pub xi1: f64,
    pub xi2: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Seasonal rate; ignored when the fit is non-seasonal.
    pub gamma: f64,
}

/// Fitted state and coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LgtParams {
    pub l: f64,
    pub b_loc: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub lambda: f64,
    /// Additive seasonal indices by absolute phase; empty when non-seasonal.
    pub s: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LgtFit {
    pub params: LgtParams,
    pub sse: f64,
    pub n: usize,
}

#[inline]
fn global_term(level: f64, lambda: f64) -> f64 {
    let l = level.max(0.0);
    // λ is restricted to the lattice; the exact quarter powers avoid powf.
    if lambda == 0.0 {
        1.0
    } else if lambda == 1.0 {
        l
    } else if lambda == 0.5 {
        l.sqrt()
    } else if lambda == 0.25 {
        l.sqrt().sqrt()
    } else if lambda == 0.75 {
        let r = l.sqrt();
        r * r.sqrt()
    } else {
        l.powf(lambda)
    }
}

fn seasonal_enabled(n: usize, m: usize) -> bool {
    m > 1 && n >= 2 * m + 2
}

/// Runs the recursions at a fixed configuration. Returns the SSE and final
/// state, or `None` once the running SSE exceeds `bound` or turns
/// non-finite.
pub fn lgt_run(y: &[f64], m: usize, cfg: &LgtConfig, bound: f64) -> Option<(f64, LgtParams)> {
    let n = y.len();
    if n < 2 {
        return None;
    }
    let seasonal = seasonal_enabled(n, m);
    let (mut l, mut b, mut s, start) = if seasonal {
        let (l, b, s) = seasonal_init(y, m);
        (l, b, s, m)
    } else {
        (y[0], y[1] - y[0], Vec::new(), 1)
    };
    let mut sse = 0.0;
    for (t, &v) in y.iter().enumerate().skip(start) {
        let season = if seasonal { s[t % m] } else { 0.0 };
        let mu = l + cfg.xi1 * b + cfg.xi2 * global_term(l, cfg.lambda);
        let e = v - mu - season;
        sse += e * e;
        if sse.is_nan() || sse > bound {
            return None;
        }
        let new_l = cfg.alpha * (v - season) + (1.0 - cfg.alpha) * mu;
        b = cfg.beta * (new_l - l) + (1.0 - cfg.beta) * b;
        if seasonal {
            s[t % m] = cfg.gamma * (v - new_l) + (1.0 - cfg.gamma) * season;
        }
        l = new_l;
    }
    if !l.is_finite() || !b.is_finite() {
        return None;
    }
    Some((
        sse,
        LgtParams {
            l,
            b_loc: b,
            xi1: cfg.xi1,
            xi2: cfg.xi2,
            lambda: cfg.lambda,
            s,
            alpha: cfg.alpha,
            beta: cfg.beta,
            gamma: if seasonal { cfg.gamma } else { 0.0 },
        },
    ))
}

/// Every distinct lattice point. Dimensions that cannot influence the
/// recursions are pinned: λ when ξ2 = 0, the trend rate when ξ1 = 0 and the
/// seasonal rate when the fit is non-seasonal.
pub fn lgt_lattice(seasonal: bool) -> Vec<LgtConfig> {
    let gammas: &[f64] = if seasonal { &LGT_RATES } else { &LGT_RATES[..1] };
    let mut out = Vec::new();
    for &xi1 in &LGT_SHAPE {
        let betas: &[f64] = if xi1 == 0.0 { &LGT_RATES[..1] } else { &LGT_RATES };
        for &xi2 in &LGT_SHAPE {
            let lambdas: &[f64] = if xi2 == 0.0 { &LGT_SHAPE[..1] } else { &LGT_SHAPE };
            for &lambda in lambdas {
                for &alpha in &LGT_RATES {
                    for &beta in betas {
                        for &gamma in gammas {
                            out.push(LgtConfig {
                                xi1,
                                xi2,
                                lambda,
                                alpha,
                                beta,
                                gamma,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Fits the lattice point with the smallest in-sample SSE (first wins ties).
pub fn fit_lgt(y: &[f64], m: usize) -> Option<LgtFit> {
    let n = y.len();
    if n < 3 {
        return None;
    }
    let mut best: Option<LgtFit> = None;
    for cfg in lgt_lattice(seasonal_enabled(n, m)) {
        let bound = best.as_ref().map_or(f64::INFINITY, |b| b.sse);
        if let Some((sse, params)) = lgt_run(y, m, &cfg, bound) {
            if sse < bound {
                best = Some(LgtFit { params, sse, n });
            }
        }
    }
    best
}

impl LgtFit {
    /// Iterates the transition with the level following the prediction.
    pub fn forecast(&self, h: usize) -> Vec<f64> {
        let p = &self.params;
        let mut l = p.l;
        (1..=h)
            .map(|k| {
                let mu = l + p.xi1 * p.b_loc + p.xi2 * global_term(l, p.lambda);
                l = mu;
                let season = if p.s.is_empty() {
                    0.0
                } else {
                    p.s[(self.n - 1 + k) % p.s.len()]
                };
                mu + season
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::smoothing::holt_run;
    use super::*;

    #[test]
    fn reduces_to_holt() {
        let y: Vec<f64> = (0..25).map(|t| 3.0 + 0.4 * t as f64 + (t as f64).cos()).collect();
        let cfg = LgtConfig {
            xi1: 1.0,
            xi2: 0.0,
            lambda: 0.0,
            alpha: 0.3,
            beta: 0.2,
            gamma: 0.1,
        };
        let (sse, p) = lgt_run(&y, 1, &cfg, f64::INFINITY).unwrap();
        let (hsse, hl, hb) = holt_run(&y, 0.3, 0.2, f64::INFINITY).unwrap();
        assert!((sse - hsse).abs() < 1e-9);
        assert!((p.l - hl).abs() < 1e-12 && (p.b_loc - hb).abs() < 1e-12);
        let fit = LgtFit { params: p, sse, n: y.len() };
        for (k, v) in fit.forecast(5).iter().enumerate() {
            assert!((v - (hl + (k + 1) as f64 * hb)).abs() < 1e-9);
        }
    }

    #[test]
    fn unit_lambda_is_linear_in_level() {
        assert_eq!(global_term(7.5, 1.0), 7.5);
        assert_eq!(global_term(-3.0, 1.0), 0.0);
        assert_eq!(global_term(16.0, 0.25), 2.0);
        assert_eq!(global_term(16.0, 0.75), 8.0);
    }

    #[test]
    fn lattice_sizes() {
        // ξ1 = 0 pins β; ξ2 = 0 pins λ.
        let per_shape = 1 + 4 * 5;
        assert_eq!(lgt_lattice(false).len(), (9 + 4 * 81) * per_shape);
        assert_eq!(lgt_lattice(true).len(), (9 + 4 * 81) * 9 * per_shape);
    }
}
