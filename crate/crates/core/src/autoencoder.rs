//! LSTM sequence autoencoder producing fixed-length series embeddings.
//!
//! Encoder: LSTM(1→H) → dropout → LSTM(H→H) → final hidden state →
//! linear(H→E). Decoder: the embedding repeated at every step → LSTM(E→H)
//! → dropout → LSTM(H→H) → linear(H→1) per step, emitting the sequence
//! last value first. The loss is the mean squared reconstruction error
//! over all time steps of the standardized input.
//!
//! Samples are propagated one at a time, so sequences of different length
//! share a batch without padding.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::partition_indices;
use crate::error::{Error, Result};
use crate::neural::{
    clip_global_norm, dropout_mask, Activation, AdamW, Checkpoint, Dense, DenseCache, EarlyStopping, LstmLayer,
    Parameterized, StopDecision, Tensor2,
};

pub const CHECKPOINT_KIND: &str = "autoencoder";
const STD_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AeConfig {
    pub embedding_dim: usize,
    pub hidden_dim: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub dropout: f64,
    pub max_length: usize,
    pub validation_fraction: f64,
    pub clip_norm: f64,
    /// Early-stopping patience on validation loss; `None` trains all epochs.
    pub patience: Option<usize>,
}

impl Default for AeConfig {
    fn default() -> Self {
        AeConfig::desk()
    }
}

impl AeConfig {
    pub fn paper() -> Self {
        AeConfig {
            embedding_dim: 32,
            hidden_dim: 128,
            epochs: 500,
            batch_size: 512,
            lr: 0.002,
            weight_decay: 0.005,
            dropout: 0.20,
            max_length: 500,
            validation_fraction: 0.2,
            clip_norm: 5.0,
            patience: None,
        }
    }

    pub fn desk() -> Self {
        AeConfig {
            hidden_dim: 32,
            epochs: 20,
            batch_size: 64,
            lr: 0.005,
            max_length: 100,
            ..AeConfig::paper()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("autoencoder config: {msg}")));
        if self.embedding_dim == 0 || self.hidden_dim == 0 {
            return bad("dimensions must be positive");
        }
        if self.embedding_dim >= self.max_length {
            return bad("embedding_dim must be smaller than max_length");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad("validation_fraction must lie in [0, 1)");
        }
        if self.lr.is_nan() || self.lr <= 0.0 || self.clip_norm.is_nan() || self.clip_norm <= 0.0 || self.weight_decay < 0.0 {
            return bad("lr and clip_norm must be positive, weight_decay non-negative");
        }
        Ok(())
    }
}

/// A standardized window with the statistics used to produce it.
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessed {
    pub values: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

/// Keeps the last `max_length` points and standardizes with the population
/// standard deviation (floored at 1e-8).
pub fn preprocess(x: &[f64], max_length: usize) -> Preprocessed {
    let tail = &x[x.len().saturating_sub(max_length)..];
    let n = tail.len() as f64;
    let mean = tail.iter().sum::<f64>() / n;
    let var = tail.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt().max(STD_FLOOR);
    Preprocessed {
        values: tail.iter().map(|v| (v - mean) / std).collect(),
        mean,
        std,
    }
}

/// Per-sample dropout masks: one per encoder step and one per decoder step.
#[derive(Debug, Clone)]
pub struct DropoutMasks {
    pub encoder: Vec<Vec<f64>>,
    pub decoder: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Autoencoder {
    pub embedding_dim: usize,
    pub hidden_dim: usize,
    pub max_length: usize,
    pub trained: bool,
    enc1: LstmLayer,
    enc2: LstmLayer,
    proj: Dense,
    dec1: LstmLayer,
    dec2: LstmLayer,
    out: Dense,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeHistory {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    /// 1-based epoch with the lowest validation (or training) loss.
    pub best_epoch: usize,
    pub stopped_epoch: Option<usize>,
}

pub struct TrainedAutoencoder {
    pub model: Autoencoder,
    pub history: AeHistory,
    pub optimizer: AdamW,
    pub seed: u64,
}

impl Parameterized for Autoencoder {
    fn params(&self) -> Vec<&Tensor2> {
        let mut v: Vec<&Tensor2> = Vec::with_capacity(16);
        v.extend(self.enc1.params());
        v.extend(self.enc2.params());
        v.extend(self.proj.params());
        v.extend(self.dec1.params());
        v.extend(self.dec2.params());
        v.extend(self.out.params());
        v
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor2> {
        let mut v: Vec<&mut Tensor2> = Vec::with_capacity(16);
        v.extend(self.enc1.params_mut());
        v.extend(self.enc2.params_mut());
        v.extend(self.proj.params_mut());
        v.extend(self.dec1.params_mut());
        v.extend(self.dec2.params_mut());
        v.extend(self.out.params_mut());
        v
    }

    fn param_names(&self) -> Vec<String> {
        let mut v = Vec::with_capacity(16);
        for layer in ["enc1", "enc2"] {
            for p in ["w", "u", "b"] {
                v.push(format!("{layer}.{p}"));
            }
        }
        v.push("proj.w".into());
        v.push("proj.b".into());
        for layer in ["dec1", "dec2"] {
            for p in ["w", "u", "b"] {
                v.push(format!("{layer}.{p}"));
            }
        }
        v.push("out.w".into());
        v.push("out.b".into());
        v
    }
}

fn as_steps(x: &[f64]) -> Vec<Vec<f64>> {
    x.iter().map(|&v| vec![v]).collect()
}

fn apply_mask(hs: &[Vec<f64>], masks: Option<&[Vec<f64>]>) -> Vec<Vec<f64>> {
    match masks {
        None => hs.to_vec(),
        Some(ms) => hs
            .iter()
            .zip(ms)
            .map(|(h, m)| h.iter().zip(m).map(|(a, b)| a * b).collect())
            .collect(),
    }
}

impl Autoencoder {
    pub fn new(config: &AeConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::with_rng(config, &mut rng)
    }

    fn with_rng(config: &AeConfig, rng: &mut ChaCha8Rng) -> Self {
        let (h, e) = (config.hidden_dim, config.embedding_dim);
        Autoencoder {
            embedding_dim: e,
            hidden_dim: h,
            max_length: config.max_length,
            trained: false,
            enc1: LstmLayer::new(1, h, rng),
            enc2: LstmLayer::new(h, h, rng),
            proj: Dense::new(h, e, Activation::Identity, rng),
            dec1: LstmLayer::new(e, h, rng),
            dec2: LstmLayer::new(h, h, rng),
            out: Dense::new(h, 1, Activation::Identity, rng),
        }
    }

    fn embed_standardized(&self, x: &[f64]) -> Vec<f64> {
        let h1 = self.enc1.forward(&as_steps(x));
        let h2 = self.enc2.forward(&h1);
        self.proj.forward_cached(h2.last().expect("non-empty sequence")).output
    }

    fn decode_standardized(&self, e: &[f64], len: usize) -> Vec<f64> {
        let rep = vec![e.to_vec(); len];
        let d1 = self.dec1.forward(&rep);
        let d2 = self.dec2.forward(&d1);
        let mut rev: Vec<f64> = d2.iter().map(|h| self.out.forward_cached(h).output[0]).collect();
        rev.reverse();
        rev
    }

    fn check_input(&self, series: &[f64]) -> Result<()> {
        if !self.trained {
            return Err(Error::UntrainedModel);
        }
        if series.is_empty() {
            return Err(Error::TooShort(String::new()));
        }
        Ok(())
    }

    /// Embedding of a raw series (preprocessing is applied here).
    pub fn encode(&self, series: &[f64]) -> Result<Vec<f64>> {
        self.check_input(series)?;
        let p = preprocess(series, self.max_length);
        Ok(self.embed_standardized(&p.values))
    }

    /// Embeddings of many series, computed in parallel, input order kept.
    pub fn encode_all(&self, series: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        series.par_iter().map(|s| self.encode(s)).collect()
    }

    /// Reconstruction of the preprocessed window, mapped back to the units
    /// of the input.
    pub fn decode_reconstruct(&self, series: &[f64]) -> Result<Vec<f64>> {
        self.check_input(series)?;
        let p = preprocess(series, self.max_length);
        let e = self.embed_standardized(&p.values);
        Ok(self
            .decode_standardized(&e, p.values.len())
            .into_iter()
            .map(|v| v * p.std + p.mean)
            .collect())
    }

    /// Sum of squared reconstruction errors of one standardized sequence.
    /// When `grads` is given, the gradient of that sum is accumulated into
    /// it (ordered as [`Parameterized::params`]).
    pub fn loss_grad(&self, x: &[f64], masks: Option<&DropoutMasks>, grads: Option<&mut [Tensor2]>) -> f64 {
        let t_len = x.len();
        let xs = as_steps(x);
        let (h1, c1) = self.enc1.forward_cached(&xs);
        let h1d = apply_mask(&h1, masks.map(|m| m.encoder.as_slice()));
        let (h2, c2) = self.enc2.forward_cached(&h1d);
        let pc: DenseCache = self.proj.forward_cached(&h2[t_len - 1]);
        let rep = vec![pc.output.clone(); t_len];
        let (d1, cd1) = self.dec1.forward_cached(&rep);
        let d1d = apply_mask(&d1, masks.map(|m| m.decoder.as_slice()));
        let (d2, cd2) = self.dec2.forward_cached(&d1d);
        let outs: Vec<DenseCache> = d2.iter().map(|h| self.out.forward_cached(h)).collect();
        let loss: f64 = outs
            .iter()
            .zip(x.iter().rev())
            .map(|(o, y)| (o.output[0] - y) * (o.output[0] - y))
            .sum();
        let Some(grads) = grads else {
            return loss;
        };

        let (g_enc1, rest) = grads.split_at_mut(3);
        let (g_enc2, rest) = rest.split_at_mut(3);
        let (g_proj, rest) = rest.split_at_mut(2);
        let (g_dec1, rest) = rest.split_at_mut(3);
        let (g_dec2, g_out) = rest.split_at_mut(3);

        let dd2: Vec<Vec<f64>> = outs
            .iter()
            .zip(x.iter().rev())
            .map(|(o, y)| self.out.backward(o, &[2.0 * (o.output[0] - y)], g_out))
            .collect();
        let mut dd1 = self.dec2.backward(&cd2, &dd2, g_dec2);
        if let Some(m) = masks {
            for (g, mk) in dd1.iter_mut().zip(&m.decoder) {
                g.iter_mut().zip(mk).for_each(|(a, b)| *a *= b);
            }
        }
        let drep = self.dec1.backward(&cd1, &dd1, g_dec1);
        let mut de = vec![0.0; self.embedding_dim];
        for d in &drep {
            de.iter_mut().zip(d).for_each(|(a, b)| *a += b);
        }
        let dh2_last = self.proj.backward(&pc, &de, g_proj);
        let mut dh2 = vec![vec![0.0; self.hidden_dim]; t_len];
        dh2[t_len - 1] = dh2_last;
        let mut dh1 = self.enc2.backward(&c2, &dh2, g_enc2);
        if let Some(m) = masks {
            for (g, mk) in dh1.iter_mut().zip(&m.encoder) {
                g.iter_mut().zip(mk).for_each(|(a, b)| *a *= b);
            }
        }
        self.enc1.backward(&c1, &dh1, g_enc1);
        loss
    }

    pub fn sample_masks(&self, len: usize, rate: f64, rng: &mut ChaCha8Rng) -> Option<DropoutMasks> {
        if rate <= 0.0 {
            return None;
        }
        let mut gen = || (0..len).map(|_| dropout_mask(self.hidden_dim, rate, rng)).collect();
        let encoder = gen();
        let decoder = gen();
        Some(DropoutMasks { encoder, decoder })
    }

    pub fn to_checkpoint(&self, optimizer: Option<&AdamW>, seed: u64, epoch: usize) -> Checkpoint {
        let mut ck = Checkpoint::capture(CHECKPOINT_KIND, self, optimizer, seed, epoch);
        ck.metadata = serde_json::json!({
            "embedding_dim": self.embedding_dim,
            "hidden_dim": self.hidden_dim,
            "max_length": self.max_length,
            "trained": self.trained,
        });
        ck
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        if ck.kind != CHECKPOINT_KIND {
            return Err(Error::InvalidArgument(format!("expected an autoencoder checkpoint, found {}", ck.kind)));
        }
        let get = |k: &str| {
            ck.metadata
                .get(k)
                .and_then(|v| v.as_u64())
                .map(|v| v as usize)
                .ok_or_else(|| Error::InvalidArgument(format!("checkpoint metadata lacks {k}")))
        };
        let config = AeConfig {
            embedding_dim: get("embedding_dim")?,
            hidden_dim: get("hidden_dim")?,
            max_length: get("max_length")?,
            ..AeConfig::desk()
        };
        let mut model = Autoencoder::new(&config, 0);
        ck.restore_into(&mut model)?;
        model.trained = ck.metadata.get("trained").and_then(|v| v.as_bool()).unwrap_or(false);
        Ok(model)
    }
}

/// Mean per-step squared error over a set of standardized sequences
/// (dropout off).
pub fn reconstruction_loss(model: &Autoencoder, seqs: &[Vec<f64>]) -> f64 {
    let (sse, steps) = seqs
        .iter()
        .fold((0.0, 0usize), |(s, n), x| (s + model.loss_grad(x, None, None), n + x.len()));
    sse / steps.max(1) as f64
}

/// Trains on the given raw training sequences.
pub fn train_autoencoder(series: &[Vec<f64>], config: &AeConfig, seed: u64) -> Result<TrainedAutoencoder> {
    train_autoencoder_with(series, config, seed, |_, _, _| {})
}

/// As [`train_autoencoder`], calling `on_epoch(epoch, train_loss, val_loss)`
/// after every epoch.
pub fn train_autoencoder_with<F>(
    series: &[Vec<f64>],
    config: &AeConfig,
    seed: u64,
    mut on_epoch: F,
) -> Result<TrainedAutoencoder>
where
    F: FnMut(usize, f64, f64),
{
    config.validate()?;
    if series.len() < 2 {
        return Err(Error::SingleSeriesCorpus);
    }
    let seqs: Vec<Vec<f64>> = series.iter().map(|s| preprocess(s, config.max_length).values).collect();
    let (train_idx, val_idx) = if config.validation_fraction > 0.0 {
        partition_indices(seqs.len(), 1.0 - config.validation_fraction, seed)?
    } else {
        ((0..seqs.len()).collect(), Vec::new())
    };
    let val: Vec<Vec<f64>> = val_idx.iter().map(|&i| seqs[i].clone()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = Autoencoder::with_rng(config, &mut rng);
    let mut opt = AdamW::new(config.lr, config.weight_decay);
    let mut history = AeHistory {
        train_loss: Vec::with_capacity(config.epochs),
        val_loss: Vec::with_capacity(config.epochs),
        best_epoch: 0,
        stopped_epoch: None,
    };
    let mut stopper = config.patience.map(EarlyStopping::new);
    let mut best: Option<(Autoencoder, AdamW)> = None;
    let mut best_val = f64::INFINITY;
    let mut order = train_idx.clone();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let (mut epoch_sse, mut epoch_steps) = (0.0, 0usize);
        for batch in order.chunks(config.batch_size) {
            let mut grads = model.zero_grads();
            let mut steps = 0usize;
            for &i in batch {
                let x = &seqs[i];
                let masks = model.sample_masks(x.len(), config.dropout, &mut rng);
                epoch_sse += model.loss_grad(x, masks.as_ref(), Some(&mut grads));
                steps += x.len();
            }
            epoch_steps += steps;
            let inv = 1.0 / steps as f64;
            grads.iter_mut().for_each(|g| g.scale(inv));
            clip_global_norm(&mut grads, config.clip_norm);
            let mut params = model.params_mut();
            opt.update(&mut params, &grads);
        }
        let train_loss = epoch_sse / epoch_steps.max(1) as f64;
        let val_loss = if val.is_empty() {
            train_loss
        } else {
            reconstruction_loss(&model, &val)
        };
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(Error::DivergenceDetected {
                epoch,
                loss: train_loss,
            });
        }
        history.train_loss.push(train_loss);
        history.val_loss.push(val_loss);
        on_epoch(epoch, train_loss, val_loss);
        if val_loss < best_val {
            best_val = val_loss;
            history.best_epoch = epoch;
            if stopper.is_some() {
                best = Some((model.clone(), opt.clone()));
            }
        }
        if let Some(s) = stopper.as_mut() {
            if s.observe(val_loss) == StopDecision::Stop {
                history.stopped_epoch = Some(epoch);
                break;
            }
        }
    }
    if let Some((m, o)) = best {
        model = m;
        opt = o;
    }
    model.trained = true;
    Ok(TrainedAutoencoder {
        model,
        history,
        optimizer: opt,
        seed,
    })
}

/// Setup of the sine reconstruction and noise breakdown experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SineExperiment {
    pub n_series: usize,
    pub length: usize,
    /// Noise sd of the training sines (unit amplitude).
    pub train_noise: f64,
    pub config: AeConfig,
    /// Amplitude signal-to-noise ratios probed on the tanh ramp.
    pub snr_grid: Vec<f64>,
    /// Noise draws averaged per SNR value.
    pub draws: usize,
}

impl Default for SineExperiment {
    fn default() -> Self {
        SineExperiment {
            n_series: 2000,
            length: 100,
            train_noise: 0.1,
            config: AeConfig {
                embedding_dim: 4,
                hidden_dim: 16,
                epochs: 100,
                batch_size: 64,
                lr: 0.005,
                dropout: 0.2,
                weight_decay: 0.005,
                validation_fraction: 0.1,
                ..AeConfig::desk()
            },
            snr_grid: vec![2.0, 1.4, 1.0, 0.7, 0.5, 0.35, 0.3, 0.25, 0.2, 0.175, 0.15, 0.125, 0.1, 0.08, 0.05],
            draws: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SineReport {
    /// Correlation of the reconstruction of a lightly noisy sine with the
    /// clean sine, one entry per probe frequency.
    pub sine_corr: Vec<f64>,
    /// `(snr, mean correlation with the clean ramp)`.
    pub breakdown: Vec<(f64, f64)>,
    /// SNR where the mean correlation first drops below 0.5 going down the
    /// grid, linearly interpolated between the bracketing grid points.
    pub threshold_snr: Option<f64>,
    pub first_epoch_loss: f64,
    pub last_epoch_loss: f64,
}

/// Trains on random noisy sines, then measures clean-signal reconstruction
/// and how correlation collapses as noise is added to a tanh ramp.
pub fn run_sine_experiment(exp: &SineExperiment, seed: u64) -> Result<SineReport> {
    use rand_distr::{Distribution, Normal};

    let data = crate::synthetic::sine_corpus(exp.n_series, exp.length, exp.train_noise, seed);
    let trained = train_autoencoder(&data, &exp.config, seed.wrapping_add(1))?;
    let model = &trained.model;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    // Probe frequencies in a 1:3 band inside the training range.
    let mut sine_corr = Vec::new();
    for k in 0..10 {
        let cycles = 0.8 + 0.16 * k as f64;
        let (clean, noisy) =
            crate::synthetic::noisy_sine(exp.length, cycles, 0.6 * k as f64, exp.train_noise, &mut rng);
        sine_corr.push(crate::stats::pearson(&model.decode_reconstruct(&noisy)?, &clean));
    }
    let ramp = crate::synthetic::tanh_ramp(exp.length);
    let sd_signal = crate::stats::var_pop(&ramp).sqrt();
    let mut breakdown = Vec::with_capacity(exp.snr_grid.len());
    for &snr in &exp.snr_grid {
        let noise = Normal::new(0.0, sd_signal / snr).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let mut acc = 0.0;
        for _ in 0..exp.draws {
            let noisy: Vec<f64> = ramp.iter().map(|v| v + noise.sample(&mut rng)).collect();
            acc += crate::stats::pearson(&model.decode_reconstruct(&noisy)?, &ramp);
        }
        breakdown.push((snr, acc / exp.draws.max(1) as f64));
    }
    let mut threshold_snr = None;
    for w in breakdown.windows(2) {
        let ((s0, c0), (s1, c1)) = (w[0], w[1]);
        if c0 >= 0.5 && c1 < 0.5 {
            threshold_snr = Some(s1 + (s0 - s1) * (0.5 - c1) / (c0 - c1));
            break;
        }
    }
    Ok(SineReport {
        sine_corr,
        breakdown,
        threshold_snr,
        first_epoch_loss: trained.history.train_loss[0],
        last_epoch_loss: *trained.history.train_loss.last().expect("at least one epoch"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::grad_check;
    use rand::Rng;

    #[test]
    fn preprocess_examples() {
        let p = preprocess(&[5.0; 10], 500);
        assert!(p.values.iter().all(|&v| v == 0.0));
        let p = preprocess(&[1.0, 2.0, 3.0], 500);
        assert_eq!(p.mean, 2.0);
        assert!((p.std - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(p.values.iter().sum::<f64>().abs() < 1e-15);
        let long: Vec<f64> = (0..1200).map(|v| v as f64).collect();
        let p = preprocess(&long, 500);
        assert_eq!(p.values.len(), 500);
        assert_eq!(p.mean, (700.0 + 1199.0) / 2.0);
    }

    #[test]
    fn untrained_model_refuses_to_encode() {
        let m = Autoencoder::new(&AeConfig { hidden_dim: 4, embedding_dim: 2, ..AeConfig::desk() }, 1);
        assert!(matches!(m.encode(&[1.0, 2.0, 3.0]), Err(Error::UntrainedModel)));
    }

    #[test]
    fn full_graph_gradient_with_dropout_masks() {
        let cfg = AeConfig {
            hidden_dim: 3,
            embedding_dim: 2,
            ..AeConfig::desk()
        };
        let mut model = Autoencoder::new(&cfg, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x: Vec<f64> = (0..6).map(|_| rng.random_range(-1.5..1.5)).collect();
        let masks = model.sample_masks(x.len(), 0.3, &mut rng);
        let mut grads = model.zero_grads();
        model.loss_grad(&x, masks.as_ref(), Some(&mut grads));
        let report = grad_check(&mut model, &grads, |m| m.loss_grad(&x, masks.as_ref(), None));
        assert!(report.max_rel_error < 1e-4, "{report:?}");
    }

    #[test]
    fn checkpoint_round_trip() {
        let cfg = AeConfig {
            hidden_dim: 4,
            embedding_dim: 3,
            ..AeConfig::desk()
        };
        let mut m = Autoencoder::new(&cfg, 2);
        m.trained = true;
        let ck = m.to_checkpoint(None, 2, 0);
        let back = Autoencoder::from_checkpoint(&Checkpoint::from_json(&ck.to_json().unwrap()).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
