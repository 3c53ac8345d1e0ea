//! Weighting network: 76 features → ReLU hidden layer → 14 softmax
//! weights, trained end-to-end on the per-series OWA of the combined
//! forecast.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{PeriodName, SeriesType};
use crate::error::{Error, Result};
use crate::metrics::{SeriesBaseline, OWA_EPS};
use crate::model_pool::N_MODELS;
use crate::neural::{dropout_mask, Activation, AdamW, Checkpoint, Dense, Parameterized, Tensor2};
use crate::stat_features::{StatFeatures, N_STAT_FEATURES, STAT_FEATURE_NAMES};

pub const EMBEDDING_DIM: usize = 32;
pub const N_FEATURES: usize = N_STAT_FEATURES + EMBEDDING_DIM + 2;
pub const CHECKPOINT_KIND: &str = "weight_net";
const STD_FLOOR: f64 = 1e-8;

/// Names of the 76 inputs in order.
pub fn feature_names() -> Vec<String> {
    let mut names: Vec<String> = STAT_FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    names.extend((0..EMBEDDING_DIM).map(|k| format!("lstm_{k}")));
    names.push("period".into());
    names.push("type".into());
    names
}

/// Unstandardized feature vector; missing statistical features are NaN.
pub fn raw_features(
    id: &str,
    stat: Option<&StatFeatures>,
    embedding: Option<&[f64]>,
    period: PeriodName,
    series_type: SeriesType,
) -> Result<Vec<f64>> {
    let stat = stat.ok_or_else(|| Error::MissingPart {
        id: id.to_string(),
        part: "statistical features",
    })?;
    let emb = embedding.ok_or_else(|| Error::MissingPart {
        id: id.to_string(),
        part: "embedding",
    })?;
    if stat.values.len() != N_STAT_FEATURES {
        return Err(Error::shape(N_STAT_FEATURES, stat.values.len()));
    }
    if emb.len() != EMBEDDING_DIM {
        return Err(Error::shape(EMBEDDING_DIM, emb.len()));
    }
    let mut v = Vec::with_capacity(N_FEATURES);
    v.extend(
        stat.values
            .iter()
            .zip(&stat.missing)
            .map(|(&x, &miss)| if miss { f64::NAN } else { x }),
    );
    v.extend_from_slice(emb);
    v.push(period.ordinal() as f64);
    v.push(series_type.ordinal() as f64);
    Ok(v)
}

/// Column-wise standardization fitted on training rows; NaN becomes 0
/// after scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::shape(width, "ragged rows"));
        }
        let mut mean = vec![0.0; width];
        let mut std = vec![0.0; width];
        for j in 0..width {
            let col: Vec<f64> = rows.iter().map(|r| r[j]).filter(|v| v.is_finite()).collect();
            if col.is_empty() {
                std[j] = 1.0;
                continue;
            }
            let m = col.iter().sum::<f64>() / col.len() as f64;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / col.len() as f64;
            mean[j] = m;
            std[j] = var.sqrt().max(STD_FLOOR);
        }
        Ok(Standardizer { mean, std })
    }

    pub fn apply(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.mean.len() {
            return Err(Error::shape(self.mean.len(), row.len()));
        }
        Ok(row
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| {
                let z = (v - m) / s;
                if z.is_finite() {
                    z
                } else {
                    0.0
                }
            })
            .collect())
    }
}

/// Assembles and standardizes the 76-feature input of one series.
pub fn build_features(
    id: &str,
    stat: Option<&StatFeatures>,
    embedding: Option<&[f64]>,
    period: PeriodName,
    series_type: SeriesType,
    standardizer: &Standardizer,
) -> Result<Vec<f64>> {
    standardizer.apply(&raw_features(id, stat, embedding, period, series_type)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeightNetConfig {
    pub hidden_dim: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub dropout: f64,
    pub weight_decay: f64,
    /// Share of series used for training; the rest is validation.
    pub train_fraction: f64,
}

impl Default for WeightNetConfig {
    fn default() -> Self {
        WeightNetConfig::desk()
    }
}

impl WeightNetConfig {
    pub fn paper() -> Self {
        WeightNetConfig {
            hidden_dim: 1024,
            epochs: 12,
            batch_size: 4096,
            lr: 0.002,
            dropout: 0.258,
            weight_decay: 0.003064,
            train_fraction: 0.8,
        }
    }

    pub fn desk() -> Self {
        WeightNetConfig {
            hidden_dim: 256,
            epochs: 30,
            batch_size: 32,
            ..WeightNetConfig::paper()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("weight net config: {msg}")));
        if self.hidden_dim == 0 || self.batch_size == 0 {
            return bad("hidden_dim and batch_size must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad("train_fraction must lie in (0, 1)");
        }
        if self.lr.is_nan() || self.lr <= 0.0 || self.weight_decay < 0.0 {
            return bad("lr must be positive and weight_decay non-negative");
        }
        Ok(())
    }
}

/// Everything needed to score a weighting of one series.
#[derive(Debug, Clone, PartialEq)]
pub struct WnSample {
    pub id: String,
    /// Standardized features (length 76).
    pub features: Vec<f64>,
    /// Forecasts of the 14 pool members, each of length h.
    pub forecasts: Vec<Vec<f64>>,
    pub actual: Vec<f64>,
    pub baseline: SeriesBaseline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightNet {
    pub dropout: f64,
    pub standardizer: Option<Standardizer>,
    hidden: Dense,
    out: Dense,
}

impl Parameterized for WeightNet {
    fn params(&self) -> Vec<&Tensor2> {
        let mut v: Vec<&Tensor2> = self.hidden.params().to_vec();
        v.extend(self.out.params());
        v
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor2> {
        let mut v: Vec<&mut Tensor2> = Vec::with_capacity(4);
        v.extend(self.hidden.params_mut());
        v.extend(self.out.params_mut());
        v
    }

    fn param_names(&self) -> Vec<String> {
        ["hidden.w", "hidden.b", "out.w", "out.b"].map(String::from).to_vec()
    }
}

/// `ŷ_t = Σ_i w_i b_it`.
pub fn combine(weights: &[f64], forecasts: &[Vec<f64>]) -> Result<Vec<f64>> {
    if weights.len() != forecasts.len() {
        return Err(Error::shape(forecasts.len(), weights.len()));
    }
    let h = forecasts.first().map_or(0, Vec::len);
    if forecasts.iter().any(|r| r.len() != h) {
        return Err(Error::shape(h, "ragged forecast rows"));
    }
    let mut out = vec![0.0; h];
    for (w, row) in weights.iter().zip(forecasts) {
        for (o, b) in out.iter_mut().zip(row) {
            *o += w * b;
        }
    }
    Ok(out)
}

#[inline]
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Per-series OWA of a forecast and its gradient with respect to the
/// forecast.
pub fn owa_and_grad(forecast: &[f64], actual: &[f64], baseline: &SeriesBaseline) -> (f64, Vec<f64>) {
    let h = actual.len() as f64;
    let sn = baseline.smape_naive2.max(OWA_EPS);
    let mn = baseline.mase_naive2.max(OWA_EPS);
    let mut smape = 0.0;
    let mut mae = 0.0;
    let mut grad = vec![0.0; actual.len()];
    for (t, (&f, &y)) in forecast.iter().zip(actual).enumerate() {
        let a = (y - f).abs();
        let den = y.abs() + f.abs();
        mae += a;
        let mut g = sign(f - y) / (h * baseline.scale) * 0.5 / mn;
        if den > 0.0 {
            smape += a / den;
            g += 0.5 / sn * (200.0 / h) * (sign(f - y) * den - a * sign(f)) / (den * den);
        }
        grad[t] = g;
    }
    let smape = 200.0 * smape / h;
    let mase = mae / h / baseline.scale;
    (0.5 * (smape / sn + mase / mn), grad)
}

impl WeightNet {
    /// Hidden layer uniformly initialized, output layer zero so that a new
    /// net emits uniform weights.
    pub fn new(hidden_dim: usize, dropout: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        WeightNet {
            dropout,
            standardizer: None,
            hidden: Dense::new(N_FEATURES, hidden_dim, Activation::Relu, &mut rng),
            out: Dense::zeros(hidden_dim, N_MODELS, Activation::Softmax),
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden.outputs()
    }

    /// Simplex weights for standardized features (inference mode).
    pub fn forward(&self, features: &[f64]) -> Result<Vec<f64>> {
        let h = self.hidden.forward(features)?;
        self.out.forward(&h)
    }

    /// Simplex weights for unstandardized features.
    pub fn forward_raw(&self, raw: &[f64]) -> Result<Vec<f64>> {
        let s = self.standardizer.as_ref().ok_or(Error::UntrainedModel)?;
        self.forward(&s.apply(raw)?)
    }

    pub fn forward_batch(&self, features: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        features.par_iter().map(|f| self.forward(f)).collect()
    }

    /// Per-series OWA of the combined forecast; with `grads` the gradient is
    /// accumulated as well. `mask` is the dropout mask on the hidden layer.
    pub fn loss_grad(&self, sample: &WnSample, mask: Option<&[f64]>, grads: Option<&mut [Tensor2]>) -> f64 {
        let hc = self.hidden.forward_cached(&sample.features);
        let hidden_out: Vec<f64> = match mask {
            Some(m) => hc.output.iter().zip(m).map(|(a, b)| a * b).collect(),
            None => hc.output.clone(),
        };
        let oc = self.out.forward_cached(&hidden_out);
        let combined = combine(&oc.output, &sample.forecasts).expect("validated sample shape");
        let (loss, dy) = owa_and_grad(&combined, &sample.actual, &sample.baseline);
        let Some(grads) = grads else {
            return loss;
        };
        let dw: Vec<f64> = sample
            .forecasts
            .iter()
            .map(|row| row.iter().zip(&dy).map(|(b, g)| b * g).sum())
            .collect();
        let (g_hidden, g_out) = grads.split_at_mut(2);
        let mut dh = self.out.backward(&oc, &dw, g_out);
        if let Some(m) = mask {
            dh.iter_mut().zip(m).for_each(|(a, b)| *a *= b);
        }
        self.hidden.backward(&hc, &dh, g_hidden);
        loss
    }

    /// Mean per-series OWA in inference mode.
    pub fn mean_owa(&self, samples: &[WnSample]) -> f64 {
        let total: f64 = samples.par_iter().map(|s| self.loss_grad(s, None, None)).collect::<Vec<_>>().iter().sum();
        total / samples.len().max(1) as f64
    }

    pub fn to_checkpoint(&self, optimizer: Option<&AdamW>, seed: u64, epoch: usize) -> Checkpoint {
        let mut ck = Checkpoint::capture(CHECKPOINT_KIND, self, optimizer, seed, epoch);
        ck.metadata = serde_json::json!({
            "hidden_dim": self.hidden_dim(),
            "dropout": self.dropout,
            "standardizer": self.standardizer,
        });
        ck
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        if ck.kind != CHECKPOINT_KIND {
            return Err(Error::InvalidArgument(format!("expected a weight_net checkpoint, found {}", ck.kind)));
        }
        let hidden_dim = ck
            .metadata
            .get("hidden_dim")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::InvalidArgument("checkpoint metadata lacks hidden_dim".into()))? as usize;
        let dropout = ck.metadata.get("dropout").and_then(|v| v.as_f64()).unwrap_or(0.0);
        let mut net = WeightNet::new(hidden_dim, dropout, 0);
        ck.restore_into(&mut net)?;
        net.standardizer = match ck.metadata.get("standardizer") {
            Some(v) if !v.is_null() => Some(serde_json::from_value(v.clone())?),
            _ => None,
        };
        Ok(net)
    }
}

/// Mean per-series OWA of the equal-weight average of all pool members.
pub fn uniform_owa(samples: &[WnSample]) -> f64 {
    let w = vec![1.0 / N_MODELS as f64; N_MODELS];
    let total: f64 = samples
        .iter()
        .map(|s| {
            let c = combine(&w, &s.forecasts).expect("validated sample shape");
            owa_and_grad(&c, &s.actual, &s.baseline).0
        })
        .sum();
    total / samples.len().max(1) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WnHistory {
    /// Index 0 is the untrained net.
    pub train_owa: Vec<f64>,
    pub val_owa: Vec<f64>,
}

pub struct TrainedWeightNet {
    pub net: WeightNet,
    pub history: WnHistory,
    pub optimizer: AdamW,
    pub seed: u64,
}

fn check_sample(s: &WnSample) -> Result<()> {
    if s.features.len() != N_FEATURES {
        return Err(Error::shape(N_FEATURES, s.features.len()));
    }
    if s.forecasts.len() != N_MODELS {
        return Err(Error::shape(N_MODELS, s.forecasts.len()));
    }
    if s.forecasts.iter().any(|r| r.len() != s.actual.len()) {
        return Err(Error::shape(s.actual.len(), "forecast rows of another length"));
    }
    Ok(())
}

/// Trains on standardized samples; `standardizer` is stored in the net.
pub fn train_weight_net(
    train: &[WnSample],
    val: &[WnSample],
    standardizer: Option<Standardizer>,
    config: &WeightNetConfig,
    seed: u64,
) -> Result<TrainedWeightNet> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::InvalidArgument("weight net needs at least one training series".into()));
    }
    for s in train.iter().chain(val) {
        check_sample(s)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = WeightNet::new(config.hidden_dim, config.dropout, seed);
    net.standardizer = standardizer;
    let mut opt = AdamW::new(config.lr, config.weight_decay);
    let mut history = WnHistory {
        train_owa: vec![net.mean_owa(train)],
        val_owa: vec![if val.is_empty() { f64::NAN } else { net.mean_owa(val) }],
    };
    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let mut grads = net.zero_grads();
            for &i in batch {
                let mask = dropout_mask(config.hidden_dim, config.dropout, &mut rng);
                net.loss_grad(&train[i], Some(&mask), Some(&mut grads));
            }
            let inv = 1.0 / batch.len() as f64;
            grads.iter_mut().for_each(|g| g.scale(inv));
            let mut params = net.params_mut();
            opt.update(&mut params, &grads);
        }
        let tr = net.mean_owa(train);
        if !tr.is_finite() {
            return Err(Error::DivergenceDetected { epoch, loss: tr });
        }
        history.train_owa.push(tr);
        history.val_owa.push(if val.is_empty() { f64::NAN } else { net.mean_owa(val) });
    }
    Ok(TrainedWeightNet {
        net,
        history,
        optimizer: opt,
        seed,
    })
}

/// Effective ensemble sizes and mean weights over a set of weight vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsageStats {
    /// `histogram[k]` counts series with exactly `k` weights above the
    /// threshold (k = 0..=14).
    pub histogram: Vec<usize>,
    pub mean_weight: Vec<f64>,
}

pub const DEFAULT_USAGE_THRESHOLD: f64 = 0.05;

pub fn ensemble_usage_stats(weights: &[Vec<f64>], threshold: f64) -> UsageStats {
    let mut histogram = vec![0usize; N_MODELS + 1];
    let mut mean_weight = vec![0.0; N_MODELS];
    for w in weights {
        histogram[w.iter().filter(|&&v| v > threshold).count()] += 1;
        for (m, v) in mean_weight.iter_mut().zip(w) {
            *m += v;
        }
    }
    let n = weights.len().max(1) as f64;
    mean_weight.iter_mut().for_each(|m| *m /= n);
    UsageStats {
        histogram,
        mean_weight,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::grad_check;
    use rand::Rng;

    fn sample(rng: &mut ChaCha8Rng, h: usize) -> WnSample {
        let actual: Vec<f64> = (0..h).map(|_| rng.random_range(50.0..150.0)).collect();
        let forecasts = (0..N_MODELS)
            .map(|_| actual.iter().map(|y| y + rng.random_range(-30.0..30.0)).collect())
            .collect();
        WnSample {
            id: "x".into(),
            features: (0..N_FEATURES).map(|_| rng.random_range(-2.0..2.0)).collect(),
            forecasts,
            actual,
            baseline: SeriesBaseline {
                scale: rng.random_range(2.0..10.0),
                smape_naive2: rng.random_range(5.0..20.0),
                mase_naive2: rng.random_range(0.5..3.0),
            },
        }
    }

    #[test]
    fn new_net_is_uniform() {
        let net = WeightNet::new(8, 0.2, 1);
        let w = net.forward(&vec![0.7; N_FEATURES]).unwrap();
        assert!(w.iter().all(|&v| (v - 1.0 / 14.0).abs() < 1e-15));
    }

    #[test]
    fn combine_examples() {
        let rows = vec![vec![1.0, 2.0], vec![3.0, 6.0]];
        assert_eq!(combine(&[1.0, 0.0], &rows).unwrap(), rows[0]);
        let y = [5.0, -2.0];
        let rows = vec![y.iter().map(|v| v - 1.0).collect(), y.iter().map(|v| v + 1.0).collect()];
        assert_eq!(combine(&[0.5, 0.5], &rows).unwrap(), y.to_vec());
        assert!(combine(&[1.0], &rows).is_err());
    }

    #[test]
    fn owa_matches_metrics() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = sample(&mut rng, 6);
        let f = &s.forecasts[2];
        let scores = s.baseline.score(&s.actual, f).unwrap();
        let (owa, _) = owa_and_grad(f, &s.actual, &s.baseline);
        assert!((owa - scores.owa()).abs() < 1e-12);
    }

    #[test]
    fn gradient_through_owa() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut net = WeightNet::new(6, 0.3, 5);
        // Move the output layer away from zero so every path is exercised.
        for p in net.params_mut() {
            p.data.iter_mut().for_each(|v| *v += rng.random_range(-0.3..0.3));
        }
        let s = sample(&mut rng, 5);
        let mask = dropout_mask(6, 0.3, &mut rng);
        let mut grads = net.zero_grads();
        net.loss_grad(&s, Some(&mask), Some(&mut grads));
        let report = grad_check(&mut net, &grads, |n| n.loss_grad(&s, Some(&mask), None));
        assert!(report.max_rel_error < 1e-4, "{report:?}");
    }

    #[test]
    fn usage_extremes() {
        let one_hot: Vec<Vec<f64>> = (0..5)
            .map(|k| (0..N_MODELS).map(|i| f64::from(u8::from(i == k))).collect())
            .collect();
        assert_eq!(ensemble_usage_stats(&one_hot, 0.05).histogram[1], 5);
        let uniform = vec![vec![1.0 / 14.0; N_MODELS]; 3];
        let u = ensemble_usage_stats(&uniform, 0.05);
        assert_eq!(u.histogram[14], 3);
        assert!((u.mean_weight.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn standardizer_identities() {
        let rows = vec![vec![1.0, 5.0, f64::NAN], vec![3.0, 5.0, 2.0]];
        let s = Standardizer::fit(&rows).unwrap();
        assert_eq!(s.apply(&[2.0, 5.0, f64::NAN]).unwrap(), vec![0.0, 0.0, 0.0]);
        assert_eq!(s.std[1], STD_FLOOR);
    }
}
