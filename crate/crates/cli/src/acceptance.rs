//! The ten acceptance checks run by `donut verify` and by the `acceptance`
//! test target. Each check is self-contained except 6 and 10, which share
//! one desk-scale `run-all` in a scratch directory.

use std::cell::OnceCell;
use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use donut_core::analysis::{
    cluster_features, correlation_matrix, permutation_importance, permutation_importance_with,
};
use donut_core::autoencoder::{run_sine_experiment, AeConfig, Autoencoder, SineExperiment};
use donut_core::metrics::{mase, naive2, owa, smape, Aggregation, SeriesBaseline, SeriesScores};
use donut_core::model_pool::{ar_aic, fit_forecast, fit_ou, fit_quantile_line, pinball_loss};
use donut_core::neural::{dropout_mask, grad_check, Activation, Dense, LstmLayer, Parameterized, Tensor2};
use donut_core::oracle::{
    combination_loss, greedy_build, optimal_selection, optimal_weights, optimal_weights_with_incumbent,
    OracleInstance,
};
use donut_core::stat_features::{
    extract_stat_features, N_STAT_FEATURES, SCALE_DEPENDENT_FEATURES, STAT_FEATURE_NAMES,
};
use donut_core::weight_net::{uniform_owa, WeightNet, WnSample, N_FEATURES};
use donut_core::{ModelId, N_MODELS};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use tempfile::TempDir;

use crate::config::PipelineConfig;
use crate::persist;
use crate::pipeline::{files, run_all};
use crate::stages;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Criterion {
    Metrics,
    Oracle,
    Greedy,
    Gradients,
    Autoencoder,
    WeightNet,
    ModelPool,
    StatFeatures,
    Importance,
    Determinism,
}

impl Criterion {
    pub const ALL: [Criterion; 10] = [
        Criterion::Metrics,
        Criterion::Oracle,
        Criterion::Greedy,
        Criterion::Gradients,
        Criterion::Autoencoder,
        Criterion::WeightNet,
        Criterion::ModelPool,
        Criterion::StatFeatures,
        Criterion::Importance,
        Criterion::Determinism,
    ];

    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Self> {
        Self::ALL.get(usize::from(n).checked_sub(1)?).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Metrics => "metrics",
            Criterion::Oracle => "oracle vs brute force",
            Criterion::Greedy => "greedy curve",
            Criterion::Gradients => "gradient checks",
            Criterion::Autoencoder => "autoencoder sines",
            Criterion::WeightNet => "weight net",
            Criterion::ModelPool => "model pool",
            Criterion::StatFeatures => "statistical features",
            Criterion::Importance => "importance and clustering",
            Criterion::Determinism => "determinism",
        }
    }

    /// Wall-clock limit; exceeding it fails the criterion.
    pub fn budget(self) -> Option<Duration> {
        let secs = match self {
            Criterion::Metrics => 5,
            Criterion::Oracle => 60,
            Criterion::Gradients => 120,
            Criterion::Autoencoder => 15 * 60,
            Criterion::WeightNet => 20 * 60,
            Criterion::ModelPool => 5 * 60,
            Criterion::StatFeatures => 120,
            Criterion::Greedy | Criterion::Importance | Criterion::Determinism => return None,
        };
        Some(Duration::from_secs(secs))
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    /// Seed of the shared desk run and of the sine experiment.
    pub seed: u64,
    /// Parent of the scratch directories; the system temp dir by default.
    pub scratch: Option<PathBuf>,
}

impl Default for Options {
    fn default() -> Self {
        Options { seed: 42, scratch: None }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub criterion: Criterion,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {} ({:.1} s): {}",
            self.criterion.number(),
            if self.passed { "PASS" } else { "FAIL" },
            self.criterion.name(),
            self.seconds,
            self.detail
        )
    }
}

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

trait OrMsg<T> {
    fn or_msg(self, what: &str) -> std::result::Result<T, String>;
}

impl<T, E: Display> OrMsg<T> for std::result::Result<T, E> {
    fn or_msg(self, what: &str) -> std::result::Result<T, String> {
        self.map_err(|e| format!("{what}: {e}"))
    }
}

impl<T> OrMsg<T> for Option<T> {
    fn or_msg(self, what: &str) -> std::result::Result<T, String> {
        self.ok_or_else(|| format!("{what}: no result"))
    }
}

/// A desk-scale `run-all` kept alive for the criteria that need one.
struct DeskRun {
    _dir: TempDir,
    work: PathBuf,
    config: PipelineConfig,
}

struct Shared<'a> {
    options: &'a Options,
    desk: OnceCell<std::result::Result<DeskRun, String>>,
}

impl Shared<'_> {
    fn scratch(&self) -> std::result::Result<TempDir, String> {
        match &self.options.scratch {
            Some(dir) => tempfile::Builder::new().prefix("donut-verify-").tempdir_in(dir),
            None => tempfile::Builder::new().prefix("donut-verify-").tempdir(),
        }
        .or_msg("scratch directory")
    }

    fn desk_config(&self, work: &Path) -> PipelineConfig {
        let mut config = PipelineConfig::desk();
        config.work_dir = work.to_path_buf();
        config.seed = self.options.seed;
        config.threads = 1;
        config
    }

    fn desk(&self) -> std::result::Result<&DeskRun, String> {
        self.desk
            .get_or_init(|| {
                let dir = self.scratch()?;
                let work = dir.path().join("run");
                let config = self.desk_config(&work);
                single_threaded(|| run_all(&config)).or_msg("desk run")?;
                Ok(DeskRun {
                    _dir: dir,
                    work,
                    config,
                })
            })
            .as_ref()
            .map_err(Clone::clone)
    }
}

fn single_threaded<T>(f: impl FnOnce() -> crate::error::Result<T> + Send) -> crate::error::Result<T>
where
    T: Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| crate::error::CliError::Config(format!("thread pool: {e}")))?;
    pool.install(f)
}

/// Runs the selected criteria in order.
pub fn run_criteria(criteria: &[Criterion], options: &Options) -> Vec<CheckResult> {
    let shared = Shared {
        options,
        desk: OnceCell::new(),
    };
    criteria
        .iter()
        .map(|&criterion| {
            let start = Instant::now();
            let outcome = match criterion {
                Criterion::Metrics => metrics_suite(options.seed),
                Criterion::Oracle => oracle_vs_grid(),
                Criterion::Greedy => greedy_curves(),
                Criterion::Gradients => gradient_checks(),
                Criterion::Autoencoder => sine_experiment(options.seed),
                Criterion::WeightNet => weight_net(&shared),
                Criterion::ModelPool => model_pool(),
                Criterion::StatFeatures => stat_features(),
                Criterion::Importance => importance_and_clusters(),
                Criterion::Determinism => determinism(&shared),
            };
            let elapsed = start.elapsed();
            let (mut passed, mut detail) = match outcome {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            if let Some(budget) = criterion.budget() {
                if elapsed > budget {
                    passed = false;
                    detail = format!("{detail}; over the {} s budget", budget.as_secs());
                }
            }
            CheckResult {
                criterion,
                passed,
                detail,
                seconds: elapsed.as_secs_f64(),
            }
        })
        .collect()
}

fn metrics_suite(seed: u64) -> Check {
    ensure(smape(&[10.0, 10.0], &[10.0, 10.0]).or_msg("smape")? == 0.0, || "smape of a perfect forecast".into())?;
    let s = smape(&[100.0], &[50.0]).or_msg("smape")?;
    ensure((s - 66.6667).abs() < 1e-4, || format!("smape([100],[50]) = {s}"))?;
    ensure(smape(&[0.0], &[0.0]).or_msg("smape")? == 0.0, || "smape 0/0".into())?;
    let train = [1.0, 2.0, 3.0, 4.0];
    ensure(mase(&train, 1, &[5.0, 6.0], &[5.0, 6.0]).or_msg("mase")? == 0.0, || "mase of a perfect forecast".into())?;
    let m = mase(&train, 1, &[5.0, 6.0], &[4.0, 4.0]).or_msg("mase")?;
    ensure((m - 1.5).abs() < 1e-15, || format!("mase example = {m}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..1_000 {
        let m = [1, 4, 12][rng.random_range(0..3)];
        let n = m + rng.random_range(3..40);
        let mut level = rng.random_range(-50.0..50.0);
        let train: Vec<f64> = (0..n)
            .map(|_| {
                level += rng.random_range(-2.0..2.0);
                level
            })
            .collect();
        let h = rng.random_range(1..=18);
        let actual: Vec<f64> = (0..h).map(|_| level + rng.random_range(-5.0..5.0)).collect();
        let forecast: Vec<f64> = actual.iter().map(|y| y + rng.random_range(-5.0..5.0)).collect();
        let alpha = if rng.random_bool(0.1) { 2.0 } else { rng.random_range(0.0..10.0) };
        let scaled: Vec<f64> = actual.iter().zip(&forecast).map(|(y, f)| y + alpha * (f - y)).collect();
        let base = mase(&train, m, &actual, &forecast).or_msg("mase")?;
        let moved = mase(&train, m, &actual, &scaled).or_msg("mase")?;
        let err = (moved - alpha * base).abs() / (1.0 + alpha * base);
        worst = worst.max(err);
    }
    ensure(worst <= 1e-12, || format!("mase linearity error {worst:e}"))?;

    let mut scores = Vec::new();
    for _ in 0..50 {
        let m = [1, 4, 12][rng.random_range(0..3)];
        let n = 3 * m + rng.random_range(6..30);
        let train: Vec<f64> = (0..n)
            .map(|t| 50.0 + (t % m) as f64 * 3.0 + rng.random_range(-4.0..4.0))
            .collect();
        let h = rng.random_range(2..=8);
        let actual: Vec<f64> = (0..h).map(|_| 50.0 + rng.random_range(-6.0..6.0)).collect();
        let baseline = SeriesBaseline::new(&train, m, &actual).or_msg("baseline")?;
        scores.push(baseline.score(&actual, &naive2(&train, m, h)).or_msg("score")?);
    }
    for agg in [Aggregation::PerSeries, Aggregation::Pooled] {
        let v = owa(&scores, agg);
        ensure(v == 1.0, || format!("owa(naive2, naive2) = {v} under {agg:?}"))?;
    }
    let rel = SeriesScores {
        smape: 8.0,
        mase: 1.2,
        smape_naive2: 10.0,
        mase_naive2: 1.0,
    }
    .owa();
    ensure((rel - 1.0).abs() < 1e-15, || format!("owa of 0.8 and 1.2 = {rel}"))?;

    ensure(naive2(&[1.0, 3.0, 7.0], 1, 3) == vec![7.0; 3], || "naive2 with m = 1".into())?;
    ensure(naive2(&[4.0; 30], 12, 5) == vec![4.0; 5], || "naive2 of a constant".into())?;
    let pattern = [0.5, 1.0, 1.5, 1.0];
    let train: Vec<f64> = (0..16).map(|t| 10.0 * pattern[t % 4]).collect();
    let f = naive2(&train, 4, 4);
    ensure(f.iter().zip(pattern).all(|(g, w)| (g - 10.0 * w).abs() < 1e-9), || {
        format!("naive2 periodic pattern: {f:?}")
    })?;
    Ok(format!("examples exact, linearity error {worst:.1e} over 1000, OWA self-normalized"))
}

fn oracle_instance(rng: &mut ChaCha8Rng, k: usize, h: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let y: Vec<f64> = (0..h).map(|_| rng.random_range(-5.0..5.0)).collect();
    let rows = (0..k)
        .map(|_| {
            let bias = rng.random_range(-3.0..3.0);
            y.iter().map(|v| v + bias + rng.random_range(-2.0..2.0)).collect()
        })
        .collect();
    (rows, y)
}

fn grid_min(rows: &[Vec<f64>], y: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for a in 0..=100 {
        for b in 0..=(100 - a) {
            let x = [a as f64 / 100.0, b as f64 / 100.0, (100 - a - b) as f64 / 100.0];
            best = best.min(combination_loss(&x, rows, y));
        }
    }
    best
}

fn oracle_vs_grid() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(201);
    for i in 0..500 {
        let (rows, y) = oracle_instance(&mut rng, 3, 4);
        let s = optimal_weights(&rows, &y).or_msg("simplex")?;
        let g = grid_min(&rows, &y);
        let spread = (0..4)
            .map(|t| {
                let col = rows.iter().map(|r| r[t]);
                col.clone().fold(f64::NEG_INFINITY, f64::max) - col.fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        ensure(s.objective <= g + 1e-12, || format!("instance {i}: {} above grid {g}", s.objective))?;
        ensure(s.objective >= g - 4.0 * 0.02 * spread, || format!("instance {i}: {} far below grid {g}", s.objective))?;
    }
    for i in 0..10_000 {
        let k = rng.random_range(1..=6);
        let (rows, y) = oracle_instance(&mut rng, k, 4);
        let s = optimal_weights(&rows, &y).or_msg("simplex")?;
        let (_, sel) = optimal_selection(&rows, &y).or_msg("selection")?;
        ensure(s.objective <= sel, || format!("instance {i}: combination {} > selection {sel}", s.objective))?;
    }
    for i in 0..1_000 {
        let k = rng.random_range(2..=8);
        let h = rng.random_range(1..=8);
        let (rows, y) = oracle_instance(&mut rng, k, h);
        let mut prev = optimal_weights(&rows[..1], &y).or_msg("simplex")?;
        for j in 2..=k {
            let mut incumbent = prev.x.clone();
            incumbent.push(0.0);
            let next = optimal_weights_with_incumbent(&rows[..j], &y, &incumbent).or_msg("simplex")?;
            ensure(next.objective <= prev.objective, || {
                format!("nested instance {i}, pool {j}: {} > {}", next.objective, prev.objective)
            })?;
            prev = next;
        }
    }
    Ok("500 grid instances, 10000 combination vs selection, 1000 nested pools".into())
}

fn greedy_curves() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    for trial in 0..1_000 {
        let n = rng.random_range(2..=6);
        let h = rng.random_range(2..=8);
        let instances: Vec<OracleInstance> = (0..n)
            .map(|i| {
                let (rows, actual) = oracle_instance(&mut rng, N_MODELS, h);
                OracleInstance {
                    id: format!("g{i}"),
                    rows,
                    actual,
                    scale: rng.random_range(0.5..2.0),
                }
            })
            .collect();
        let mut pool = ModelId::ALL.to_vec();
        pool.shuffle(&mut rng);
        pool.truncate(rng.random_range(2..=6));
        let g = greedy_build(&instances, &pool).or_msg("greedy")?;
        ensure(g.curve.len() == pool.len(), || format!("trial {trial}: curve length {}", g.curve.len()))?;
        ensure(g.curve.windows(2).all(|w| w[1] <= w[0]), || format!("trial {trial}: curve {:?}", g.curve))?;
    }
    Ok("1000 seeded corpora, every curve weakly decreasing".into())
}

struct DenseNet(Dense);

impl Parameterized for DenseNet {
    fn params(&self) -> Vec<&Tensor2> {
        self.0.params().to_vec()
    }
    fn params_mut(&mut self) -> Vec<&mut Tensor2> {
        self.0.params_mut().into_iter().collect()
    }
    fn param_names(&self) -> Vec<String> {
        vec!["weight".into(), "bias".into()]
    }
}

struct LstmNet(LstmLayer);

impl Parameterized for LstmNet {
    fn params(&self) -> Vec<&Tensor2> {
        self.0.params().to_vec()
    }
    fn params_mut(&mut self) -> Vec<&mut Tensor2> {
        self.0.params_mut().into_iter().collect()
    }
    fn param_names(&self) -> Vec<String> {
        vec!["w_x".into(), "w_h".into(), "bias".into()]
    }
}

fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-r..r)).collect()
}

fn gradient_checks() -> Check {
    const TOL: f64 = 1e-4;
    let mut rng = ChaCha8Rng::seed_from_u64(401);
    let mut worst = [0.0f64; 4];
    let activations = [Activation::Identity, Activation::Relu, Activation::Tanh, Activation::Softmax];
    for i in 0..20 {
        let (nin, nout) = (rng.random_range(1..=6), rng.random_range(1..=5));
        let mut net = DenseNet(Dense::new(nin, nout, activations[i % 4], &mut rng));
        let x = uniform_vec(&mut rng, nin, 1.5);
        let c = uniform_vec(&mut rng, nout, 1.0);
        let loss = |n: &DenseNet| n.0.forward_cached(&x).output.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>();
        let mut grads = net.zero_grads();
        let cache = net.0.forward_cached(&x);
        net.0.backward(&cache, &c, &mut grads);
        worst[0] = worst[0].max(grad_check(&mut net, &grads, loss).max_rel_error);
    }
    for _ in 0..20 {
        let (nin, hidden, len) = (rng.random_range(1..=3), rng.random_range(1..=4), rng.random_range(1..=6));
        let mut net = LstmNet(LstmLayer::new(nin, hidden, &mut rng));
        let xs: Vec<Vec<f64>> = (0..len).map(|_| uniform_vec(&mut rng, nin, 1.5)).collect();
        let cs: Vec<Vec<f64>> = (0..len).map(|_| uniform_vec(&mut rng, hidden, 1.0)).collect();
        let loss = |n: &LstmNet| {
            n.0.forward(&xs)
                .iter()
                .zip(&cs)
                .map(|(h, c)| h.iter().zip(c).map(|(a, b)| a * b).sum::<f64>())
                .sum::<f64>()
        };
        let mut grads = net.zero_grads();
        let (_, cache) = net.0.forward_cached(&xs);
        net.0.backward(&cache, &cs, &mut grads);
        worst[1] = worst[1].max(grad_check(&mut net, &grads, loss).max_rel_error);
    }
    for i in 0..20 {
        let cfg = AeConfig {
            hidden_dim: rng.random_range(2..=4),
            embedding_dim: rng.random_range(1..=3),
            ..AeConfig::desk()
        };
        let mut model = Autoencoder::new(&cfg, 500 + i);
        let len = rng.random_range(3..=8);
        let x = uniform_vec(&mut rng, len, 1.5);
        let masks = model.sample_masks(x.len(), 0.3, &mut rng);
        let mut grads = model.zero_grads();
        model.loss_grad(&x, masks.as_ref(), Some(&mut grads));
        let report = grad_check(&mut model, &grads, |m| m.loss_grad(&x, masks.as_ref(), None));
        worst[2] = worst[2].max(report.max_rel_error);
    }
    for i in 0..20 {
        let hidden = rng.random_range(2..=8);
        let mut net = WeightNet::new(hidden, 0.3, 600 + i);
        let sample = random_sample(&mut rng, format!("w{i}"));
        let mask = dropout_mask(hidden, 0.3, &mut rng);
        let mut grads = net.zero_grads();
        net.loss_grad(&sample, Some(&mask), Some(&mut grads));
        let report = grad_check(&mut net, &grads, |n| n.loss_grad(&sample, Some(&mask), None));
        worst[3] = worst[3].max(report.max_rel_error);
    }
    let names = ["dense", "LSTM", "autoencoder", "weight net"];
    let summary = names
        .iter()
        .zip(worst)
        .map(|(n, w)| format!("{n} {w:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    ensure(worst.iter().all(|&w| w < TOL), || format!("max relative error: {summary}"))?;
    Ok(format!("max relative error: {summary}"))
}

fn random_sample(rng: &mut ChaCha8Rng, id: String) -> WnSample {
    let h = rng.random_range(3..=8);
    let actual: Vec<f64> = (0..h).map(|_| rng.random_range(90.0..110.0)).collect();
    let forecasts = (0..N_MODELS)
        .map(|_| {
            let bias = rng.random_range(-10.0..10.0);
            actual.iter().map(|y| y + bias + rng.random_range(-5.0..5.0)).collect()
        })
        .collect();
    WnSample {
        id,
        features: uniform_vec(rng, N_FEATURES, 1.5),
        forecasts,
        actual,
        baseline: SeriesBaseline {
            scale: rng.random_range(2.0..6.0),
            smape_naive2: rng.random_range(5.0..15.0),
            mase_naive2: rng.random_range(1.0..3.0),
        },
    }
}

fn sine_experiment(seed: u64) -> Check {
    let exp = SineExperiment::default();
    let ratio = exp.length / exp.config.embedding_dim;
    let report = run_sine_experiment(&exp, seed).or_msg("sine experiment")?;
    let min_corr = report.sine_corr.iter().copied().fold(f64::INFINITY, f64::min);
    let loss_ratio = report.last_epoch_loss / report.first_epoch_loss;
    let threshold = report.threshold_snr;
    let detail = format!(
        "compression {ratio}:1, min sine correlation {min_corr:.3}, breakdown SNR {}, loss ratio {loss_ratio:.3}",
        threshold.map_or("none".into(), |t| format!("{t:.3}"))
    );
    ensure(min_corr > 0.95, || detail.clone())?;
    ensure(threshold.is_some_and(|t| (0.175..=0.7).contains(&t)), || detail.clone())?;
    ensure(loss_ratio < 0.5, || detail.clone())?;
    Ok(detail)
}

/// Weight-net seeds of the desk training comparison.
const WN_SEEDS: [u64; 3] = [1, 2, 3];

fn weight_net(shared: &Shared<'_>) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(601);
    let mut worst_sum: f64 = 0.0;
    // 20 random nets × 500 random inputs.
    for k in 0..20 {
        let net = WeightNet::new(rng.random_range(1..=64), 0.0, k);
        for _ in 0..500 {
            let scale = [1.0, 10.0, 100.0][rng.random_range(0..3)];
            let w = net.forward(&uniform_vec(&mut rng, N_FEATURES, scale)).or_msg("forward")?;
            ensure(w.len() == N_MODELS && w.iter().all(|&v| v >= 0.0 && v.is_finite()), || {
                format!("invalid weights {w:?}")
            })?;
            worst_sum = worst_sum.max((w.iter().sum::<f64>() - 1.0).abs());
        }
    }
    ensure(worst_sum <= 1e-9, || format!("weights sum off by {worst_sum:e}"))?;

    let desk = shared.desk()?;
    let work = &desk.work;
    let corpus = persist::read_corpus(&work.join(files::CORPUS_DIR)).or_msg("corpus")?;
    let forecasts = persist::read_forecast_matrices(&work.join(files::FORECASTS)).or_msg("forecasts")?;
    let stats = persist::read_stats(&work.join(files::STAT_FEATURES)).or_msg("features")?;
    let embeddings = persist::read_embeddings(&work.join(files::EMBEDDINGS)).or_msg("embeddings")?;
    let roles = persist::read_roles(&work.join(files::SPLIT)).or_msg("split")?;
    let inputs = stages::assemble(&corpus, &forecasts, &stats, &embeddings).or_msg("inputs")?;
    let mut lines = Vec::new();
    let mut wins = 0;
    for seed in WN_SEEDS {
        let trained = stages::train_weightnet(&inputs, &roles, &desk.config.weightnet, seed).or_msg("training")?;
        let (_, val, _) = stages::role_samples(&inputs, &roles, trained.net.standardizer.as_ref()).or_msg("samples")?;
        let final_owa = trained.net.mean_owa(&val);
        let uniform = uniform_owa(&val);
        let epoch0 = trained.history.val_owa[0];
        let win = final_owa <= uniform && final_owa <= epoch0;
        wins += usize::from(win);
        lines.push(format!("seed {seed}: {final_owa:.4} vs uniform {uniform:.4}, epoch 0 {epoch0:.4}"));
    }
    let detail = format!("simplex sum error {worst_sum:.1e}; {wins}/3 seeds improve ({})", lines.join("; "));
    ensure(wins >= 2, || detail.clone())?;
    Ok(detail)
}

fn equivariance_series(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let slope = rng.random_range(-1.0..1.0);
    let amp = rng.random_range(0.0..5.0);
    (0..n)
        .map(|t| 20.0 + slope * t as f64 + amp * (t as f64 * std::f64::consts::FRAC_PI_2).sin() + rng.random_range(-3.0..3.0))
        .collect()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

fn ar1_recovered(seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let mut y = vec![0.0];
    for _ in 1..2000 {
        let prev = y[y.len() - 1];
        y.push(0.8 * prev + noise.sample(&mut rng));
    }
    ar_aic(&y).is_some_and(|fit| fit.p == 1 && (0.75..=0.85).contains(&fit.phi[0]))
}

fn model_pool() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(701);
    for case in 0..100 {
        let len = rng.random_range(12..60);
        let y = equivariance_series(&mut rng, len);
        let m = [1, 4, 12][rng.random_range(0..3)];
        let c = rng.random_range(-100.0..100.0);
        let a = rng.random_range(0.01..100.0);
        let shifted: Vec<f64> = y.iter().map(|v| v + c).collect();
        let scaled: Vec<f64> = y.iter().map(|v| v * a).collect();
        for model in ModelId::EQUIVARIANT {
            let (f, _) = fit_forecast(model, &y, m, 8);
            let (g, _) = fit_forecast(model, &shifted, m, 8);
            let expect: Vec<f64> = f.iter().map(|v| v + c).collect();
            ensure(close(&g, &expect, 1e-9), || format!("case {case}: {model} not shift equivariant"))?;
            let (g, _) = fit_forecast(model, &scaled, m, 8);
            let expect: Vec<f64> = f.iter().map(|v| v * a).collect();
            ensure(close(&g, &expect, 1e-9), || format!("case {case}: {model} not scale equivariant"))?;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let noise = Normal::new(0.0, 0.2).expect("normal");
    let mut y = vec![8.0];
    for _ in 1..2000 {
        let prev = y[y.len() - 1];
        y.push(prev + 0.5 * (10.0 - prev) + noise.sample(&mut rng));
    }
    let ou = fit_ou(&y).or_msg("OU fit")?;
    ensure((0.4..=0.6).contains(&ou.gamma) && (9.5..=10.5).contains(&ou.m_level), || {
        format!("OU estimates gamma {} level {}", ou.gamma, ou.m_level)
    })?;
    ensure(ar1_recovered(1), || "AR(1) not recovered on seed 1".into())?;
    let hits = (0..100).filter(|&s| ar1_recovered(1_000 + s)).count();
    ensure(hits >= 60, || format!("AR(1) recovered on {hits}/100 draws"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(702);
    for _ in 0..5 {
        let y: Vec<f64> = (0..120)
            .map(|_| {
                let base = 10.0 + rng.random_range(-0.5..0.5);
                if rng.random_bool(0.03) {
                    base + rng.random_range(5.0..10.0)
                } else {
                    base
                }
            })
            .collect();
        for tau in [0.99, 0.01] {
            let fit = fit_quantile_line(&y, tau).or_msg("quantile fit")?;
            let mut grid = f64::INFINITY;
            for i in -200..=200 {
                for j in -100..=100 {
                    grid = grid.min(pinball_loss(&y, tau, 10.0 + i as f64 * 0.02, j as f64 * 0.002));
                }
            }
            ensure(fit.loss <= grid + 1e-9, || format!("tau {tau}: loss {} above grid {grid}", fit.loss))?;
        }
    }
    Ok(format!("equivariance on 100 cases, OU recovered, AR(1) {hits}/100, quantile lines beat grids"))
}

fn feature_series(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let slope = rng.random_range(-0.5..0.5);
    let amp = rng.random_range(0.0..4.0);
    let mut ar = 0.0;
    (0..n)
        .map(|t| {
            ar = 0.6 * ar + rng.random_range(-1.0..1.0);
            30.0 + slope * t as f64 + amp * (t as f64 * std::f64::consts::TAU / 12.0).sin() + ar
        })
        .collect()
}

fn stat_features() -> Check {
    ensure(STAT_FEATURE_NAMES.len() == 42 && N_STAT_FEATURES == 42, || "feature count".into())?;
    ensure(
        STAT_FEATURE_NAMES[0] == "x_acf1" && STAT_FEATURE_NAMES[24] == "ARCH.LM" && STAT_FEATURE_NAMES[41] == "s_len",
        || "feature order".into(),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(801);
    for case in 0..60 {
        let y = feature_series(&mut rng, 96);
        let m = [1, 4, 12][case % 3];
        let a = rng.random_range(0.01..100.0);
        let b = rng.random_range(-1_000.0..1_000.0);
        let z: Vec<f64> = y.iter().map(|v| a * v + b).collect();
        let (fy, fz) = (extract_stat_features(&y, m), extract_stat_features(&z, m));
        ensure(fy.values.len() == N_STAT_FEATURES, || "feature vector length".into())?;
        for (k, name) in STAT_FEATURE_NAMES.iter().enumerate() {
            if SCALE_DEPENDENT_FEATURES.contains(name) {
                continue;
            }
            let (u, v) = (fy.values[k], fz.values[k]);
            ensure((u - v).abs() <= 1e-6 * (1.0 + u.abs()) && fy.missing[k] == fz.missing[k], || {
                format!("case {case}: {name} {u} vs {v} after a = {a}, b = {b}")
            })?;
        }
    }
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let noise: Vec<f64> = (0..1000).map(|_| normal.sample(&mut rng)).collect();
    let f = extract_stat_features(&noise, 1);
    let (acf1, entropy) = (f.get("x_acf1").unwrap_or(f64::NAN), f.get("entropy").unwrap_or(f64::NAN));
    ensure(acf1.abs() < 0.1 && entropy > 0.9, || format!("white noise: x_acf1 {acf1}, entropy {entropy}"))?;
    let line: Vec<f64> = (0..100).map(|t| 3.0 + 0.7 * t as f64).collect();
    let f = extract_stat_features(&line, 1);
    let trend = f.get("trend").unwrap_or(f64::NAN);
    ensure(trend > 0.99, || format!("linear trend strength {trend}"))?;
    Ok(format!("42 names fixed, affine invariance on 60 cases, white noise acf1 {acf1:.3}, trend {trend:.4}"))
}

fn importance_and_clusters() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(901);
    let table: Vec<Vec<f64>> = (0..200).map(|_| uniform_vec(&mut rng, 5, 1.0)).collect();
    let target: Vec<f64> = table.iter().map(|r| r[2]).collect();
    let loss = |t: &[Vec<f64>]| t.iter().zip(&target).map(|(r, y)| (r[2] - y).powi(2)).sum::<f64>() / t.len() as f64;
    let identity: Vec<usize> = (0..table.len()).collect();
    for j in 0..5 {
        let r = permutation_importance_with("f", &table, &[j], &loss, &vec![identity.clone(); 5]).or_msg("importance")?;
        ensure(r.importance == 0.0, || format!("identity permutation of column {j} gives {}", r.importance))?;
    }
    let signal = permutation_importance("f2", &table, &[2], &loss, 7, 2, 5).or_msg("importance")?;
    ensure(signal.importance > 0.0 && signal.p_value < 0.01, || {
        format!("signal importance {} p {}", signal.importance, signal.p_value)
    })?;
    for j in [0, 1, 3, 4] {
        let r = permutation_importance("f", &table, &[j], &loss, 7, j as u64, 5).or_msg("importance")?;
        ensure(r.importance == 0.0, || format!("noise column {j} importance {}", r.importance))?;
    }

    let names = |p: usize| (0..p).map(|i| format!("f{i}")).collect::<Vec<String>>();
    let dup: Vec<Vec<f64>> = (0..50)
        .map(|_| {
            let r = uniform_vec(&mut rng, 3, 1.0);
            vec![r[0], r[1], r[0], r[2]]
        })
        .collect();
    let d = cluster_features(&dup, &names(4)).or_msg("clustering")?;
    ensure(d.merges[0].height == 0.0 && (d.merges[0].a, d.merges[0].b) == (0, 2), || {
        format!("duplicate merge {:?}", d.merges[0])
    })?;

    for trial in 0..200 {
        let p = rng.random_range(2..20);
        let n = rng.random_range(3..40);
        let base: Vec<Vec<f64>> = (0..n).map(|_| uniform_vec(&mut rng, 3, 1.0)).collect();
        let mix: Vec<Vec<f64>> = (0..p).map(|_| uniform_vec(&mut rng, 3, 1.0)).collect();
        let table: Vec<Vec<f64>> = base
            .iter()
            .map(|b| {
                mix.iter()
                    .map(|w| w.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() + 0.1 * rng.random_range(-1.0..1.0))
                    .collect()
            })
            .collect();
        let d = cluster_features(&table, &names(p)).or_msg("clustering")?;
        ensure(d.merges.windows(2).all(|w| w[0].height <= w[1].height + 1e-12), || {
            format!("trial {trial}: Ward heights decrease")
        })?;
    }

    let hand = vec![
        vec![1.0, 1.0, 4.0],
        vec![2.0, 2.0, 1.0],
        vec![3.0, 4.0, 3.0],
        vec![4.0, 3.0, 2.0],
    ];
    let rho = correlation_matrix(&hand);
    ensure((rho[0][1] - 0.8).abs() < 1e-15 && (rho[0][2] + 0.4).abs() < 1e-15, || format!("correlations {rho:?}"))?;
    let d = cluster_features(&hand, &names(3)).or_msg("clustering")?;
    let first = (d.merges[0].a, d.merges[0].b, d.merges[0].size);
    let second = (d.merges[1].a, d.merges[1].b, d.merges[1].size);
    ensure(
        first == (0, 1, 2)
            && second == (2, 3, 3)
            && (d.merges[0].height - 0.4f64.sqrt()).abs() < 1e-12
            && (d.merges[1].height - (10.0f64 / 3.0).sqrt()).abs() < 1e-12,
        || format!("hand trace merges {:?}", d.merges),
    )?;
    Ok(format!(
        "identity importance 0, signal p {:.1e}, duplicates merge at 0, 200 Ward trees monotone, hand trace reproduced",
        signal.p_value
    ))
}

fn tree_contents(root: &Path) -> std::io::Result<BTreeMap<PathBuf, Vec<u8>>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).expect("path under root").to_path_buf();
                out.insert(rel, std::fs::read(&path)?);
            }
        }
    }
    Ok(out)
}

fn determinism(shared: &Shared<'_>) -> Check {
    let first = shared.desk()?;
    let dir = shared.scratch()?;
    let work = dir.path().join("run");
    let config = shared.desk_config(&work);
    single_threaded(|| run_all(&config)).or_msg("second desk run")?;
    let a = tree_contents(&first.work).or_msg("reading first tree")?;
    let b = tree_contents(&work).or_msg("reading second tree")?;
    let names_a: Vec<&PathBuf> = a.keys().collect();
    let names_b: Vec<&PathBuf> = b.keys().collect();
    ensure(names_a == names_b, || format!("file sets differ: {names_a:?} vs {names_b:?}"))?;
    if let Some((path, _)) = a.iter().find(|(p, bytes)| b.get(*p) != Some(*bytes)) {
        return Err(format!("{} differs between runs", path.display()));
    }
    let bytes: usize = a.values().map(Vec::len).sum();
    Ok(format!("{} files ({bytes} bytes) identical across two runs", a.len()))
}
