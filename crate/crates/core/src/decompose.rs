//! Classical moving-average decomposition and the lag-m seasonality test.

use crate::stats::acf;

/// Whether seasonal components combine by addition or multiplication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    Additive,
    Multiplicative,
}

/// Output of [`classical`]. `trend` is NaN where the centred moving
/// average is undefined (the first and last half-window).
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub trend: Vec<f64>,
    /// Seasonal component per observation (phase `t % m`).
    pub seasonal: Vec<f64>,
    /// One index per phase; sums to 0 (additive) or averages 1 (multiplicative).
    pub indices: Vec<f64>,
    pub remainder: Vec<f64>,
    pub form: Form,
}

impl Decomposition {
    /// Seasonal index for absolute time position `t` (0-based from series start).
    pub fn index_at(&self, t: usize) -> f64 {
        self.indices[t % self.indices.len()]
    }
}

/// Centred moving average of order `w` (a 2×w average when `w` is even).
pub fn centred_moving_average(x: &[f64], w: usize) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![f64::NAN; n];
    if w == 0 || n < w + (w + 1) % 2 {
        return out;
    }
    if w % 2 == 1 {
        let half = w / 2;
        for t in half..n - half {
            out[t] = x[t - half..=t + half].iter().sum::<f64>() / w as f64;
        }
    } else {
        let half = w / 2;
        for t in half..n.saturating_sub(half) {
            let inner: f64 = x[t + 1 - half..t + half].iter().sum();
            out[t] = (inner + 0.5 * (x[t - half] + x[t + half])) / w as f64;
        }
    }
    out
}

/// Classical decomposition with seasonal period `m` (> 1) and trend window
/// `m`. Returns `None` when there is less than two full seasons of data or
/// when the multiplicative form meets a non-positive value.
pub fn classical(x: &[f64], m: usize, form: Form) -> Option<Decomposition> {
    let n = x.len();
    if m < 2 || n < 2 * m {
        return None;
    }
    if form == Form::Multiplicative && x.iter().any(|v| *v <= 0.0) {
        return None;
    }
    let trend = centred_moving_average(x, m);
    let mut sums = vec![0.0; m];
    let mut counts = vec![0usize; m];
    for t in 0..n {
        if trend[t].is_nan() {
            continue;
        }
        let detrended = match form {
            Form::Additive => x[t] - trend[t],
            Form::Multiplicative => x[t] / trend[t],
        };
        sums[t % m] += detrended;
        counts[t % m] += 1;
    }
    if counts.contains(&0) {
        return None;
    }
    let mut indices: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, c)| s / *c as f64)
        .collect();
    let centre = indices.iter().sum::<f64>() / m as f64;
    match form {
        Form::Additive => indices.iter_mut().for_each(|s| *s -= centre),
        Form::Multiplicative => {
            if centre <= 0.0 || !centre.is_finite() {
                return None;
            }
            indices.iter_mut().for_each(|s| *s /= centre)
        }
    }
    let seasonal: Vec<f64> = (0..n).map(|t| indices[t % m]).collect();
    let remainder = (0..n)
        .map(|t| match form {
            Form::Additive => x[t] - trend[t] - seasonal[t],
            Form::Multiplicative => x[t] / (trend[t] * seasonal[t]),
        })
        .collect();
    Some(Decomposition {
        trend,
        seasonal,
        indices,
        remainder,
        form,
    })
}

/// 90% one-sided autocorrelation test for seasonality at lag `m`, the test
/// the M4 Naive2 benchmark uses. Needs at least three seasons of data.
pub fn is_seasonal(x: &[f64], m: usize) -> bool {
    let n = x.len();
    if m < 2 || n < 3 * m {
        return false;
    }
    let r = acf(x, m);
    if r.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let tcrit = 1.645;
    let sum_sq: f64 = r[..m - 1].iter().map(|v| v * v).sum();
    let limit = tcrit * ((1.0 + 2.0 * sum_sq) / n as f64).sqrt();
    r[m - 1].abs() > limit
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_window_average_of_line_is_line() {
        let x: Vec<f64> = (0..20).map(|t| 2.0 * t as f64 + 1.0).collect();
        let ma = centred_moving_average(&x, 4);
        for t in 2..18 {
            assert!((ma[t] - x[t]).abs() < 1e-12);
        }
        assert!(ma[0].is_nan() && ma[1].is_nan() && ma[18].is_nan());
    }

    #[test]
    fn additive_recovers_pattern() {
        let pattern = [-1.5, 0.5, 2.0, -1.0];
        let x: Vec<f64> = (0..24).map(|t| 10.0 + 0.3 * t as f64 + pattern[t % 4]).collect();
        let d = classical(&x, 4, Form::Additive).unwrap();
        for (got, want) in d.indices.iter().zip(pattern) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn multiplicative_indices_average_one() {
        let pattern = [0.5, 1.0, 1.5, 1.0];
        let x: Vec<f64> = (0..24).map(|t| 10.0 * pattern[t % 4]).collect();
        let d = classical(&x, 4, Form::Multiplicative).unwrap();
        let avg = d.indices.iter().sum::<f64>() / 4.0;
        assert!((avg - 1.0).abs() < 1e-12);
        for (got, want) in d.indices.iter().zip(pattern) {
            assert!((got - want).abs() < 1e-10);
        }
        assert!(is_seasonal(&x, 4));
    }
}
