//! The fourteen-model forecasting pool behind one fit/forecast contract.
//!
//! Nine models stand in for the classical benchmark set (naive variants,
//! exponential smoothing, theta, autoregression, decomposition) and five
//! extend it: a linear trend, an Ornstein-Uhlenbeck mean-reversion path, a
//! local/global trend smoother and two extreme quantile trend lines.
//!
//! Every model either returns `h` finite values or falls back to the naive
//! forecast with its fallback flag set, so a [`ForecastMatrix`] is always
//! complete.

mod autoregressive;
mod lgt;
mod ou;
mod quantile;
mod smoothing;
mod trend;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use autoregressive::{ar_aic, decompose_ar, ArFit, MAX_AR_ORDER};
pub use lgt::{fit_lgt, lgt_lattice, lgt_run, LgtConfig, LgtFit, LgtParams, LGT_RATES, LGT_SHAPE};
pub use ou::{fit_ou, ou_forecast, OuParams};
pub use quantile::{fit_quantile_line, pinball_loss, quantile_trend, QuantileLine};
pub use smoothing::{fit_holt, fit_holt_winters, fit_ses, holt_run, SmoothingFit};
pub use trend::{ols_line, ols_trend, theta};

/// Members of the pool in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelId {
    Naive,
    SeasonalNaive,
    RWDrift,
    Theta,
    SES,
    Holt,
    HoltWinters,
    ArAic,
    DecomposeAr,
    OlsTrend,
    OrnsteinUhlenbeck,
    LgtPoint,
    Quantile99,
    Quantile01,
}

/// Number of models in the pool.
pub const N_MODELS: usize = 14;

impl ModelId {
    pub const ALL: [ModelId; N_MODELS] = [
        ModelId::Naive,
        ModelId::SeasonalNaive,
        ModelId::RWDrift,
        ModelId::Theta,
        ModelId::SES,
        ModelId::Holt,
        ModelId::HoltWinters,
        ModelId::ArAic,
        ModelId::DecomposeAr,
        ModelId::OlsTrend,
        ModelId::OrnsteinUhlenbeck,
        ModelId::LgtPoint,
        ModelId::Quantile99,
        ModelId::Quantile01,
    ];

    /// The nine models standing in for the classical benchmark set.
    pub const BASE_NINE: [ModelId; 9] = [
        ModelId::Naive,
        ModelId::SeasonalNaive,
        ModelId::RWDrift,
        ModelId::Theta,
        ModelId::SES,
        ModelId::Holt,
        ModelId::HoltWinters,
        ModelId::ArAic,
        ModelId::DecomposeAr,
    ];

    /// Models whose forecasts move exactly with shifts and positive
    /// rescaling of the training series.
    pub const EQUIVARIANT: [ModelId; 9] = [
        ModelId::Naive,
        ModelId::SeasonalNaive,
        ModelId::RWDrift,
        ModelId::SES,
        ModelId::Holt,
        ModelId::HoltWinters,
        ModelId::OlsTrend,
        ModelId::Quantile99,
        ModelId::Quantile01,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelId::Naive => "Naive",
            ModelId::SeasonalNaive => "SeasonalNaive",
            ModelId::RWDrift => "RWDrift",
            ModelId::Theta => "Theta",
            ModelId::SES => "SES",
            ModelId::Holt => "Holt",
            ModelId::HoltWinters => "HoltWinters",
            ModelId::ArAic => "ArAic",
            ModelId::DecomposeAr => "DecomposeAr",
            ModelId::OlsTrend => "OlsTrend",
            ModelId::OrnsteinUhlenbeck => "OrnsteinUhlenbeck",
            ModelId::LgtPoint => "LgtPoint",
            ModelId::Quantile99 => "Quantile99",
            ModelId::Quantile01 => "Quantile01",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse {
                field: "model",
                value: s.to_string(),
            })
    }
}

/// Parses a comma-separated model list (`all` and `base9` are shorthands).
pub fn parse_pool(s: &str) -> Result<Vec<ModelId>> {
    match s.trim() {
        "all" => return Ok(ModelId::ALL.to_vec()),
        "base9" => return Ok(ModelId::BASE_NINE.to_vec()),
        _ => {}
    }
    let mut pool: Vec<ModelId> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    pool.sort();
    pool.dedup();
    if pool.is_empty() {
        return Err(Error::InvalidArgument("empty model pool".into()));
    }
    Ok(pool)
}

/// Forecasts of every pool member for one series; row `i` belongs to
/// `ModelId::ALL[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastMatrix {
    pub id: String,
    pub rows: Vec<Vec<f64>>,
    pub fallback: Vec<bool>,
}

impl ForecastMatrix {
    pub fn horizon(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn row(&self, model: ModelId) -> &[f64] {
        &self.rows[model.index()]
    }

    /// Rows restricted to `pool`, in pool order.
    pub fn restrict(&self, pool: &[ModelId]) -> Vec<Vec<f64>> {
        pool.iter().map(|m| self.rows[m.index()].clone()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.len() != N_MODELS || self.fallback.len() != N_MODELS {
            return Err(Error::shape(
                format!("{N_MODELS} rows"),
                format!("{} rows", self.rows.len()),
            ));
        }
        let h = self.horizon();
        for row in &self.rows {
            if row.len() != h {
                return Err(Error::shape(format!("{h} columns"), row.len()));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "non-finite forecast for series {}",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

fn naive(train: &[f64], h: usize) -> Vec<f64> {
    vec![*train.last().expect("non-empty train"); h]
}

fn seasonal_naive(train: &[f64], m: usize, h: usize) -> Option<Vec<f64>> {
    let n = train.len();
    if m <= 1 {
        return Some(naive(train, h));
    }
    if n < m {
        return None;
    }
    Some((0..h).map(|k| train[n - m + k % m]).collect())
}

fn rw_drift(train: &[f64], h: usize) -> Option<Vec<f64>> {
    let n = train.len();
    if n < 2 {
        return None;
    }
    let last = train[n - 1];
    let drift = (last - train[0]) / (n - 1) as f64;
    Some((1..=h).map(|k| last + k as f64 * drift).collect())
}

fn dispatch(model: ModelId, train: &[f64], m: usize, h: usize) -> Option<Vec<f64>> {
    match model {
        ModelId::Naive => Some(naive(train, h)),
        ModelId::SeasonalNaive => seasonal_naive(train, m, h),
        ModelId::RWDrift => rw_drift(train, h),
        ModelId::Theta => theta(train, m, h),
        ModelId::SES => fit_ses(train).map(|f| f.forecast(h)),
        ModelId::Holt => fit_holt(train).map(|f| f.forecast(h)),
        ModelId::HoltWinters => fit_holt_winters(train, m).map(|f| f.forecast(h)),
        ModelId::ArAic => ar_aic(train).map(|f| f.forecast(train, h)),
        ModelId::DecomposeAr => decompose_ar(train, m, h),
        ModelId::OlsTrend => ols_trend(train, h),
        ModelId::OrnsteinUhlenbeck => ou_forecast(train, h),
        ModelId::LgtPoint => fit_lgt(train, m).map(|f| f.forecast(h)),
        ModelId::Quantile99 => quantile_trend(train, h, 0.99),
        ModelId::Quantile01 => quantile_trend(train, h, 0.01),
    }
}

/// Fits `model` on `train` and forecasts `h` steps. Returns the forecast
/// and whether the naive fallback was used.
pub fn fit_forecast(model: ModelId, train: &[f64], m: usize, h: usize) -> (Vec<f64>, bool) {
    assert!(!train.is_empty(), "fit_forecast needs at least one observation");
    let out = if train.len() < 3 && model != ModelId::Naive {
        None
    } else {
        dispatch(model, train, m, h)
    };
    match out {
        Some(f) if f.len() == h && f.iter().all(|v| v.is_finite()) => (f, false),
        _ => {
            log::debug!("{model} fell back to naive");
            (naive(train, h), true)
        }
    }
}

/// Forecasts of all fourteen models for one series.
pub fn forecast_all(id: &str, train: &[f64], m: usize, h: usize) -> ForecastMatrix {
    let (rows, fallback) = ModelId::ALL
        .iter()
        .map(|&model| fit_forecast(model, train, m, h))
        .unzip();
    ForecastMatrix {
        id: id.to_string(),
        rows,
        fallback,
    }
}

/// [`forecast_all`] over many series in parallel; output order follows input.
pub fn forecast_corpus(items: &[(String, Vec<f64>, usize, usize)]) -> Vec<ForecastMatrix> {
    items
        .par_iter()
        .map(|(id, train, m, h)| forecast_all(id, train, *m, *h))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_models() {
        let (f, fb) = fit_forecast(ModelId::Naive, &[1.0, 4.0, 7.0], 1, 3);
        assert_eq!(f, vec![7.0; 3]);
        assert!(!fb);
        let train = [1.0, 2.0, 3.0, 4.0, 1.0, 2.0, 3.0, 4.0];
        let (f, _) = fit_forecast(ModelId::SeasonalNaive, &train, 4, 4);
        assert_eq!(f, vec![1.0, 2.0, 3.0, 4.0]);
        let (f, _) = fit_forecast(ModelId::RWDrift, &[0.0, 1.0, 2.0, 3.0], 1, 2);
        assert_eq!(f, vec![4.0, 5.0]);
    }

    #[test]
    fn seasonal_naive_short_series_falls_back() {
        let (f, fb) = fit_forecast(ModelId::SeasonalNaive, &[1.0, 2.0, 3.0], 12, 2);
        assert!(fb);
        assert_eq!(f, vec![3.0, 3.0]);
    }

    #[test]
    fn constant_series_gives_constant_rows() {
        let train = vec![5.5; 40];
        let fm = forecast_all("c", &train, 4, 6);
        fm.validate().unwrap();
        for (model, row) in ModelId::ALL.iter().zip(&fm.rows) {
            for v in row {
                assert!((v - 5.5).abs() < 1e-9, "{model}: {row:?}");
            }
        }
    }

    #[test]
    fn canonical_order() {
        for (i, m) in ModelId::ALL.iter().enumerate() {
            assert_eq!(m.index(), i);
            assert_eq!(m.name().parse::<ModelId>().unwrap(), *m);
        }
        assert_eq!(parse_pool("Holt, Naive").unwrap(), vec![ModelId::Naive, ModelId::Holt]);
        assert_eq!(parse_pool("base9").unwrap().len(), 9);
    }
}
