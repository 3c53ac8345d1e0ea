use crate::decompose::{classical, is_seasonal, Form};

use super::smoothing::fit_ses;

/// Least-squares line `y ≈ α + β t` over `t = 1..=n`.
///
/// Uses the centred form of the closed-form estimators
/// `β = (nΣty − ΣtΣy) / (nΣt² − (Σt)²)`, `α = ȳ − β t̄`; the two are
/// algebraically identical and the centred one avoids cancellation.
pub fn ols_line(y: &[f64]) -> Option<(f64, f64)> {
    let n = y.len();
    if n < 2 {
        return None;
    }
    let t_bar = (n as f64 + 1.0) / 2.0;
    let y_bar = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, v) in y.iter().enumerate() {
        let dt = (i + 1) as f64 - t_bar;
        sxy += dt * (v - y_bar);
        sxx += dt * dt;
    }
    let beta = sxy / sxx;
    Some((y_bar - beta * t_bar, beta))
}

/// Extrapolates the OLS line to `t = n+1..=n+h`.
pub fn ols_trend(y: &[f64], h: usize) -> Option<Vec<f64>> {
    let (alpha, beta) = ols_line(y)?;
    let n = y.len();
    Some((1..=h).map(|k| alpha + beta * (n + k) as f64).collect())
}

fn theta_core(y: &[f64], h: usize) -> Option<Vec<f64>> {
    let (a, b) = ols_line(y)?;
    let n = y.len();
    let theta2: Vec<f64> = y
        .iter()
        .enumerate()
        .map(|(i, v)| 2.0 * v - (a + b * (i + 1) as f64))
        .collect();
    let ses = fit_ses(&theta2)?;
    Some(
        (1..=h)
            .map(|k| 0.5 * (a + b * (n + k) as f64) + 0.5 * ses.level)
            .collect(),
    )
}

/// Theta method: average of the extrapolated linear trend (θ = 0 line) and
/// SES on the θ = 2 line. Seasonal series are multiplicatively adjusted
/// first when the seasonality test passes.
pub fn theta(y: &[f64], m: usize, h: usize) -> Option<Vec<f64>> {
    let n = y.len();
    if m > 1 && is_seasonal(y, m) {
        if let Some(dec) = classical(y, m, Form::Multiplicative) {
            let adjusted: Vec<f64> = y
                .iter()
                .enumerate()
                .map(|(t, v)| v / dec.index_at(t))
                .collect();
            let f = theta_core(&adjusted, h)?;
            return Some(
                f.into_iter()
                    .enumerate()
                    .map(|(k, v)| v * dec.index_at(n + k))
                    .collect(),
            );
        }
    }
    theta_core(y, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let y: Vec<f64> = (1..=10).map(|t| 1.0 + 2.0 * t as f64).collect();
        let (a, b) = ols_line(&y).unwrap();
        assert!((a - 1.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
        let f = ols_trend(&y, 3).unwrap();
        for (k, v) in f.iter().enumerate() {
            assert!((v - (1.0 + 2.0 * (11 + k) as f64)).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_has_zero_slope() {
        let (a, b) = ols_line(&[4.0; 7]).unwrap();
        assert_eq!(b, 0.0);
        assert_eq!(a, 4.0);
    }

    #[test]
    fn theta_on_line_tracks_trend_direction() {
        let y: Vec<f64> = (0..30).map(|t| 5.0 + t as f64).collect();
        let f = theta(&y, 1, 5).unwrap();
        assert!(f.windows(2).all(|w| w[1] > w[0]));
    }
}
