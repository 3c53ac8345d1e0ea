//! sMAPE, MASE, OWA and the Naive2 benchmark that normalizes OWA.

use serde::{Deserialize, Serialize};

use crate::decompose::{classical, is_seasonal, Form};
use crate::error::{Error, Result};

/// Floor applied to Naive2 denominators in the per-series OWA.
pub const OWA_EPS: f64 = 1e-9;

fn check_lengths(actual: &[f64], forecast: &[f64]) -> Result<()> {
    if actual.len() != forecast.len() {
        return Err(Error::LengthMismatch(actual.len(), forecast.len()));
    }
    Ok(())
}

/// Symmetric MAPE in percent, `(200/h) Σ |y − ŷ| / (|y| + |ŷ|)`.
/// Terms with `|y| + |ŷ| = 0` contribute zero.
pub fn smape(actual: &[f64], forecast: &[f64]) -> Result<f64> {
    check_lengths(actual, forecast)?;
    if actual.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = actual
        .iter()
        .zip(forecast)
        .map(|(y, f)| {
            let den = y.abs() + f.abs();
            if den == 0.0 {
                0.0
            } else {
                (y - f).abs() / den
            }
        })
        .sum();
    Ok(200.0 * total / actual.len() as f64)
}

/// In-sample seasonal-naive MAE, the MASE denominator.
pub fn mase_scale(train: &[f64], m: usize) -> Result<f64> {
    let n = train.len();
    let m = m.max(1);
    if n <= m {
        return Err(Error::NMustExceedM { n, m });
    }
    let d = (m..n).map(|t| (train[t] - train[t - m]).abs()).sum::<f64>() / (n - m) as f64;
    if d == 0.0 {
        return Err(Error::DegenerateScale);
    }
    Ok(d)
}

/// MASE scale with the pipeline fallback: retry with `m = 1` when the
/// seasonal scale is degenerate. `None` means the series carries no scale.
pub fn mase_scale_or_naive(train: &[f64], m: usize) -> Option<f64> {
    mase_scale(train, m).or_else(|_| mase_scale(train, 1)).ok()
}

/// Mean absolute error divided by an already computed scale.
pub fn mase_with_scale(actual: &[f64], forecast: &[f64], scale: f64) -> Result<f64> {
    check_lengths(actual, forecast)?;
    if actual.is_empty() {
        return Ok(0.0);
    }
    let mae = actual
        .iter()
        .zip(forecast)
        .map(|(y, f)| (y - f).abs())
        .sum::<f64>()
        / actual.len() as f64;
    Ok(mae / scale)
}

/// Mean absolute scaled error.
pub fn mase(train: &[f64], m: usize, actual: &[f64], forecast: &[f64]) -> Result<f64> {
    check_lengths(actual, forecast)?;
    let scale = mase_scale(train, m)?;
    mase_with_scale(actual, forecast, scale)
}

/// The M4 Naive2 benchmark: naive forecast of the multiplicatively
/// seasonally adjusted series when the seasonality test passes, plain
/// naive otherwise.
pub fn naive2(train: &[f64], m: usize, h: usize) -> Vec<f64> {
    let n = train.len();
    let last = *train.last().unwrap_or(&0.0);
    let naive = vec![last; h];
    if m <= 1 || !is_seasonal(train, m) {
        return naive;
    }
    let Some(dec) = classical(train, m, Form::Multiplicative) else {
        return naive;
    };
    let level = last / dec.index_at(n - 1);
    let out: Vec<f64> = (0..h).map(|k| level * dec.index_at(n + k)).collect();
    if out.iter().all(|v| v.is_finite()) {
        out
    } else {
        naive
    }
}

/// Per-series sMAPE and MASE of a method and of Naive2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesScores {
    pub smape: f64,
    pub mase: f64,
    pub smape_naive2: f64,
    pub mase_naive2: f64,
}

impl SeriesScores {
    /// Per-series OWA with ε-floored denominators.
    pub fn owa(&self) -> f64 {
        0.5 * (self.smape / self.smape_naive2.max(OWA_EPS)
            + self.mase / self.mase_naive2.max(OWA_EPS))
    }
}

/// Scores of one series, with the reported metric triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub smape: f64,
    pub mase: f64,
    pub owa: f64,
}

/// Normalizers needed to score any forecast of one series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesBaseline {
    pub scale: f64,
    pub smape_naive2: f64,
    pub mase_naive2: f64,
}

impl SeriesBaseline {
    /// `None` when the series has no usable MASE scale (it is then excluded
    /// from aggregates).
    pub fn new(train: &[f64], m: usize, actual: &[f64]) -> Option<Self> {
        let scale = mase_scale_or_naive(train, m)?;
        let n2 = naive2(train, m, actual.len());
        Some(SeriesBaseline {
            scale,
            smape_naive2: smape(actual, &n2).ok()?,
            mase_naive2: mase_with_scale(actual, &n2, scale).ok()?,
        })
    }

    pub fn score(&self, actual: &[f64], forecast: &[f64]) -> Result<SeriesScores> {
        Ok(SeriesScores {
            smape: smape(actual, forecast)?,
            mase: mase_with_scale(actual, forecast, self.scale)?,
            smape_naive2: self.smape_naive2,
            mase_naive2: self.mase_naive2,
        })
    }
}

/// How OWA is aggregated across series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Aggregation {
    /// Mean per-series OWA (the training loss).
    PerSeries,
    /// Ratio of mean sMAPE/MASE to mean Naive2 sMAPE/MASE (the M4 figure).
    Pooled,
}

/// Aggregate OWA over a set of series.
pub fn owa(scores: &[SeriesScores], aggregation: Aggregation) -> f64 {
    if scores.is_empty() {
        return f64::NAN;
    }
    let n = scores.len() as f64;
    match aggregation {
        Aggregation::PerSeries => scores.iter().map(SeriesScores::owa).sum::<f64>() / n,
        Aggregation::Pooled => {
            let sum = |f: fn(&SeriesScores) -> f64| scores.iter().map(f).sum::<f64>() / n;
            0.5 * (sum(|s| s.smape) / sum(|s| s.smape_naive2).max(OWA_EPS)
                + sum(|s| s.mase) / sum(|s| s.mase_naive2).max(OWA_EPS))
        }
    }
}

/// Pooled summary across series: mean sMAPE, mean MASE and pooled OWA.
pub fn pooled_report(scores: &[SeriesScores]) -> LossReport {
    let n = scores.len() as f64;
    LossReport {
        smape: scores.iter().map(|s| s.smape).sum::<f64>() / n,
        mase: scores.iter().map(|s| s.mase).sum::<f64>() / n,
        owa: owa(scores, Aggregation::Pooled),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smape_examples() {
        assert_eq!(smape(&[10.0, 10.0], &[10.0, 10.0]).unwrap(), 0.0);
        assert!((smape(&[100.0], &[50.0]).unwrap() - 66.666_666_666_666_67).abs() < 1e-9);
        assert_eq!(smape(&[0.0], &[0.0]).unwrap(), 0.0);
        assert!(matches!(
            smape(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch(1, 2))
        ));
    }

    #[test]
    fn mase_examples() {
        let train = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mase(&train, 1, &[5.0, 6.0], &[5.0, 6.0]).unwrap(), 0.0);
        assert!((mase(&train, 1, &[5.0, 6.0], &[4.0, 4.0]).unwrap() - 1.5).abs() < 1e-15);
        assert!(matches!(
            mase(&[1.0, 1.0, 1.0], 1, &[1.0], &[2.0]),
            Err(Error::DegenerateScale)
        ));
        assert!(matches!(
            mase(&train, 4, &[1.0], &[2.0]),
            Err(Error::NMustExceedM { n: 4, m: 4 })
        ));
    }

    #[test]
    fn scale_fallback_to_naive() {
        // Seasonal differences vanish, first differences do not.
        let train = [1.0, 2.0, 1.0, 2.0, 1.0, 2.0];
        assert!(mase_scale(&train, 2).is_err());
        assert_eq!(mase_scale_or_naive(&train, 2), Some(1.0));
        assert_eq!(mase_scale_or_naive(&[3.0; 5], 2), None);
    }

    #[test]
    fn naive2_examples() {
        assert_eq!(naive2(&[1.0, 3.0, 7.0], 1, 3), vec![7.0; 3]);
        assert_eq!(naive2(&[4.0; 30], 12, 5), vec![4.0; 5]);
        let pattern = [0.5, 1.0, 1.5, 1.0];
        let train: Vec<f64> = (0..16).map(|t| 10.0 * pattern[t % 4]).collect();
        let f = naive2(&train, 4, 4);
        for (got, want) in f.iter().zip(pattern) {
            assert!((got - 10.0 * want).abs() < 1e-9, "{f:?}");
        }
    }

    #[test]
    fn owa_examples() {
        let s = SeriesScores {
            smape: 12.0,
            mase: 1.3,
            smape_naive2: 12.0,
            mase_naive2: 1.3,
        };
        assert_eq!(s.owa(), 1.0);
        assert_eq!(owa(&[s, s], Aggregation::Pooled), 1.0);
        assert_eq!(owa(&[s, s], Aggregation::PerSeries), 1.0);
        let r = SeriesScores {
            smape: 8.0,
            mase: 1.2,
            smape_naive2: 10.0,
            mase_naive2: 1.0,
        };
        assert!((r.owa() - 1.0).abs() < 1e-15);
    }
}
