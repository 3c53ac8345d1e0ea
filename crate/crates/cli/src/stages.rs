//! Stage computations shared by the subcommands and `run-all`. Functions
//! here take and return in-memory values; file handling lives in the
//! callers.

use std::collections::{BTreeMap, HashMap};

use donut_core::analysis::{
    cluster_features, cluster_importance, compare_buckets, feature_importance, owa_breakdown, BucketCell, Bucketing,
    Dendrogram, ImportanceRecord, OwaBreakdown, SeriesOwa,
};
use donut_core::autoencoder::{train_autoencoder_with, AeConfig, Autoencoder, TrainedAutoencoder};
use donut_core::corpus::partition_indices;
use donut_core::metrics::{owa, Aggregation, SeriesBaseline, SeriesScores};
use donut_core::model_pool::{forecast_corpus, ForecastMatrix};
use donut_core::oracle::{
    decompose_loss, greedy_build, optimal_selection, size_histogram, solve_corpus, GreedyResult, LossDecomposition,
    OracleInstance, OracleSolution, SizeHistogram, ACTIVE_EPS,
};
use donut_core::stat_features::{extract_stat_features, StatFeatures};
use donut_core::synthetic::{make_synthetic, SyntheticSpec};
use donut_core::weight_net::{
    combine, ensemble_usage_stats, feature_names, raw_features, train_weight_net, Standardizer, TrainedWeightNet,
    UsageStats, WeightNet, WeightNetConfig, WnSample, DEFAULT_USAGE_THRESHOLD,
};
use donut_core::{ModelId, PeriodName, SeriesType, SplitSeries, TimeSeries, N_MODELS};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifacts::Role;
use crate::error::{CliError, Result};

/// Name under which combined forecasts of the weighting network are stored.
pub const DONUT_METHOD: &str = "DONUT";
/// Name of the equal-weight average of the fourteen pool members.
pub const UNIFORM_METHOD: &str = "Uniform";

pub fn synthesize(series: usize, seed: u64) -> Result<Vec<TimeSeries>> {
    Ok(make_synthetic(&SyntheticSpec::desk(series), seed)?)
}

/// Series long enough to hold out a horizon, with their split. Others are
/// dropped with a warning.
pub fn usable(corpus: &[TimeSeries]) -> Vec<(&TimeSeries, SplitSeries)> {
    corpus
        .iter()
        .filter_map(|ts| match ts.split() {
            Ok(s) => Some((ts, s)),
            Err(e) => {
                warn!("excluding series: {e}");
                None
            }
        })
        .collect()
}

pub fn forecast(corpus: &[TimeSeries]) -> Vec<ForecastMatrix> {
    let items: Vec<(String, Vec<f64>, usize, usize)> = usable(corpus)
        .into_iter()
        .map(|(ts, s)| (ts.id.clone(), s.train, ts.period.m, ts.period.h))
        .collect();
    forecast_corpus(&items)
}

/// Statistical features of the fitting part of each usable series.
pub fn stat_features(corpus: &[TimeSeries]) -> Vec<(String, StatFeatures)> {
    usable(corpus)
        .par_iter()
        .map(|(ts, s)| (ts.id.clone(), extract_stat_features(&s.train, ts.period.m)))
        .collect()
}

pub fn train_ae(corpus: &[TimeSeries], config: &AeConfig, seed: u64) -> Result<TrainedAutoencoder> {
    let seqs: Vec<Vec<f64>> = usable(corpus).into_iter().map(|(_, s)| s.train).collect();
    Ok(train_autoencoder_with(&seqs, config, seed, |epoch, tr, val| {
        info!("autoencoder epoch {epoch}: train {tr:.5} validation {val:.5}");
    })?)
}

pub fn encode(model: &Autoencoder, corpus: &[TimeSeries]) -> Result<Vec<(String, Vec<f64>)>> {
    let pairs = usable(corpus);
    let seqs: Vec<Vec<f64>> = pairs.iter().map(|(_, s)| s.train.clone()).collect();
    let emb = model.encode_all(&seqs)?;
    Ok(pairs.into_iter().map(|(ts, _)| ts.id.clone()).zip(emb).collect())
}

/// Everything the weighting network needs about one series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesInputs {
    pub id: String,
    pub period: PeriodName,
    pub series_type: SeriesType,
    /// Unstandardized feature vector (missing statistics are NaN).
    pub raw: Vec<f64>,
    pub forecasts: Vec<Vec<f64>>,
    pub actual: Vec<f64>,
    pub baseline: SeriesBaseline,
}

/// Joins corpus, forecasts and features. Series without a usable MASE
/// scale are dropped with a warning; a usable series missing an artifact
/// is an error.
pub fn assemble(
    corpus: &[TimeSeries],
    forecasts: &[ForecastMatrix],
    stats: &[(String, StatFeatures)],
    embeddings: &[(String, Vec<f64>)],
) -> Result<Vec<SeriesInputs>> {
    let fm: HashMap<&str, &ForecastMatrix> = forecasts.iter().map(|f| (f.id.as_str(), f)).collect();
    let st: HashMap<&str, &StatFeatures> = stats.iter().map(|(id, f)| (id.as_str(), f)).collect();
    let em: HashMap<&str, &[f64]> = embeddings.iter().map(|(id, e)| (id.as_str(), e.as_slice())).collect();
    let mut out = Vec::new();
    for (ts, split) in usable(corpus) {
        let Some(baseline) = SeriesBaseline::new(&split.train, ts.period.m, &split.test) else {
            warn!("excluding series '{}': no usable MASE scale", ts.id);
            continue;
        };
        let f = fm.get(ts.id.as_str()).ok_or_else(|| donut_core::Error::MissingPart {
            id: ts.id.clone(),
            part: "forecasts",
        })?;
        if f.horizon() != split.test.len() {
            return Err(donut_core::Error::LengthMismatch(split.test.len(), f.horizon()).into());
        }
        let raw = raw_features(
            &ts.id,
            st.get(ts.id.as_str()).copied(),
            em.get(ts.id.as_str()).copied(),
            ts.period.name,
            ts.series_type,
        )?;
        out.push(SeriesInputs {
            id: ts.id.clone(),
            period: ts.period.name,
            series_type: ts.series_type,
            raw,
            forecasts: f.rows.clone(),
            actual: split.test,
            baseline,
        });
    }
    if out.is_empty() {
        return Err(CliError::Config("no series is usable for training".into()));
    }
    Ok(out)
}

pub fn samples(inputs: &[&SeriesInputs], standardizer: &Standardizer) -> Result<Vec<WnSample>> {
    inputs
        .iter()
        .map(|s| {
            Ok(WnSample {
                id: s.id.clone(),
                features: standardizer.apply(&s.raw)?,
                forecasts: s.forecasts.clone(),
                actual: s.actual.clone(),
                baseline: s.baseline.clone(),
            })
        })
        .collect()
}

/// Train/validation roles of the weighting-network split, in input order.
pub fn split_roles(inputs: &[SeriesInputs], train_fraction: f64, seed: u64) -> Result<Vec<(String, Role)>> {
    let (train, _) = partition_indices(inputs.len(), train_fraction, seed)?;
    let mut roles: Vec<(String, Role)> = inputs.iter().map(|s| (s.id.clone(), Role::Validation)).collect();
    for i in train {
        roles[i].1 = Role::Train;
    }
    Ok(roles)
}

/// Samples of each role, standardized with statistics of the training part.
pub fn role_samples(
    inputs: &[SeriesInputs],
    roles: &BTreeMap<String, Role>,
    standardizer: Option<&Standardizer>,
) -> Result<(Vec<WnSample>, Vec<WnSample>, Standardizer)> {
    let role = |s: &SeriesInputs| roles.get(&s.id).copied();
    let train: Vec<&SeriesInputs> = inputs.iter().filter(|s| role(s) == Some(Role::Train)).collect();
    let val: Vec<&SeriesInputs> = inputs.iter().filter(|s| role(s) == Some(Role::Validation)).collect();
    let standardizer = match standardizer {
        Some(s) => s.clone(),
        None => Standardizer::fit(&train.iter().map(|s| s.raw.clone()).collect::<Vec<_>>())?,
    };
    Ok((samples(&train, &standardizer)?, samples(&val, &standardizer)?, standardizer))
}

pub fn train_weightnet(
    inputs: &[SeriesInputs],
    roles: &BTreeMap<String, Role>,
    config: &WeightNetConfig,
    seed: u64,
) -> Result<TrainedWeightNet> {
    let (train, val, standardizer) = role_samples(inputs, roles, None)?;
    info!("weight net: {} training and {} validation series", train.len(), val.len());
    let trained = train_weight_net(&train, &val, Some(standardizer), config, seed)?;
    for (e, (tr, va)) in trained.history.train_owa.iter().zip(&trained.history.val_owa).enumerate() {
        info!("weight net epoch {e}: train OWA {tr:.5} validation OWA {va:.5}");
    }
    Ok(trained)
}

/// Weights and combined forecasts for every series.
pub struct Predictions {
    pub weights: Vec<(String, Vec<f64>)>,
    pub combined: Vec<(String, Vec<f64>)>,
}

pub fn predict(net: &WeightNet, inputs: &[SeriesInputs]) -> Result<Predictions> {
    let weights: Vec<Vec<f64>> = inputs.par_iter().map(|s| net.forward_raw(&s.raw)).collect::<donut_core::Result<_>>()?;
    let combined = inputs
        .iter()
        .zip(&weights)
        .map(|(s, w)| Ok((s.id.clone(), combine(w, &s.forecasts)?)))
        .collect::<Result<_>>()?;
    Ok(Predictions {
        weights: inputs.iter().map(|s| s.id.clone()).zip(weights).collect(),
        combined,
    })
}

/// Scores of one method on one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEval {
    pub id: String,
    pub period: PeriodName,
    pub series_type: SeriesType,
    pub role: Option<String>,
    pub method: String,
    pub scores: SeriesScores,
}

/// Pooled scores of one method over a subset of series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledEval {
    pub method: String,
    pub subset: String,
    pub n: usize,
    pub smape: f64,
    pub mase: f64,
    /// Ratio-of-means OWA.
    pub owa: f64,
    /// Mean of per-series OWA.
    pub mean_owa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub series: Vec<SeriesEval>,
    pub pooled: Vec<PooledEval>,
}

impl Evaluation {
    pub fn pooled(&self, method: &str, subset: &str) -> Option<&PooledEval> {
        self.pooled.iter().find(|p| p.method == method && p.subset == subset)
    }
}

/// Scores every method found in `methods` (name → id → forecast). When all
/// pool members are present the equal-weight average is added as well.
pub fn evaluate(
    corpus: &[TimeSeries],
    methods: &[(String, BTreeMap<String, Vec<f64>>)],
    roles: Option<&BTreeMap<String, Role>>,
) -> Result<Evaluation> {
    let mut methods = methods.to_vec();
    let pool_names: Vec<&str> = ModelId::ALL.iter().map(|m| m.name()).collect();
    let have_pool = pool_names.iter().all(|n| methods.iter().any(|(m, _)| m == n));
    if have_pool && !methods.iter().any(|(m, _)| m == UNIFORM_METHOD) {
        let by_name: HashMap<&str, &BTreeMap<String, Vec<f64>>> =
            methods.iter().map(|(m, f)| (m.as_str(), f)).collect();
        let mut uniform = BTreeMap::new();
        for id in by_name[pool_names[0]].keys() {
            let rows: Option<Vec<Vec<f64>>> = pool_names.iter().map(|n| by_name[n].get(id).cloned()).collect();
            if let Some(rows) = rows {
                uniform.insert(id.clone(), combine(&[1.0 / N_MODELS as f64; N_MODELS], &rows)?);
            }
        }
        methods.push((UNIFORM_METHOD.to_string(), uniform));
    }
    let mut series = Vec::new();
    for (ts, split) in usable(corpus) {
        let Some(baseline) = SeriesBaseline::new(&split.train, ts.period.m, &split.test) else {
            warn!("excluding series '{}' from evaluation: no usable MASE scale", ts.id);
            continue;
        };
        for (name, fc) in &methods {
            let Some(f) = fc.get(&ts.id) else { continue };
            series.push(SeriesEval {
                id: ts.id.clone(),
                period: ts.period.name,
                series_type: ts.series_type,
                role: roles.and_then(|r| r.get(&ts.id)).map(|r| r.as_str().to_string()),
                method: name.clone(),
                scores: baseline.score(&split.test, f)?,
            });
        }
    }
    let mut subsets = vec!["all".to_string()];
    if roles.is_some() {
        subsets.extend([Role::Train.as_str().to_string(), Role::Validation.as_str().to_string()]);
    }
    let mut pooled = Vec::new();
    for (name, _) in &methods {
        for subset in &subsets {
            let scores: Vec<SeriesScores> = series
                .iter()
                .filter(|e| &e.method == name && (subset == "all" || e.role.as_deref() == Some(subset)))
                .map(|e| e.scores)
                .collect();
            if scores.is_empty() {
                continue;
            }
            let n = scores.len() as f64;
            pooled.push(PooledEval {
                method: name.clone(),
                subset: subset.clone(),
                n: scores.len(),
                smape: scores.iter().map(|s| s.smape).sum::<f64>() / n,
                mase: scores.iter().map(|s| s.mase).sum::<f64>() / n,
                owa: owa(&scores, Aggregation::Pooled),
                mean_owa: owa(&scores, Aggregation::PerSeries),
            });
        }
    }
    Ok(Evaluation { series, pooled })
}

/// Oracle results of one series.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub id: String,
    pub solution: OracleSolution,
    pub scale: f64,
    pub selection: ModelId,
    pub selection_mase: f64,
    pub decomposition: Option<LossDecomposition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub pool: Vec<ModelId>,
    pub n: usize,
    pub mean_combination_mase: f64,
    pub mean_selection_mase: f64,
    /// Relative reduction of combination against selection.
    pub combination_gain: f64,
    pub histogram: SizeHistogram,
    /// How often each pool member is the best single model.
    pub selection_counts: BTreeMap<String, usize>,
    pub decomposed: usize,
    pub mean_total_loss: Option<f64>,
    pub mean_p_loss: Option<f64>,
    pub mean_e_loss: Option<f64>,
}

pub fn oracle_instances(corpus: &[TimeSeries], forecasts: &[ForecastMatrix]) -> Vec<OracleInstance> {
    let fm: HashMap<&str, &ForecastMatrix> = forecasts.iter().map(|f| (f.id.as_str(), f)).collect();
    usable(corpus)
        .into_iter()
        .filter_map(|(ts, split)| {
            let f = fm.get(ts.id.as_str())?;
            let baseline = SeriesBaseline::new(&split.train, ts.period.m, &split.test)?;
            Some(OracleInstance {
                id: ts.id.clone(),
                rows: f.rows.clone(),
                actual: split.test,
                scale: baseline.scale,
            })
        })
        .collect()
}

pub fn oracle(
    instances: &[OracleInstance],
    pool: &[ModelId],
    combined: Option<&BTreeMap<String, Vec<f64>>>,
) -> Result<(Vec<OracleRow>, OracleSummary)> {
    if instances.is_empty() {
        return Err(CliError::Config("no series is usable for the oracle".into()));
    }
    let solutions = solve_corpus(instances, pool)?;
    let rows: Vec<OracleRow> = instances
        .par_iter()
        .zip(solutions)
        .map(|(inst, solution)| {
            let restricted = inst.restrict(pool);
            let (best, loss) = optimal_selection(&restricted, &inst.actual)?;
            let decomposition = combined
                .and_then(|c| c.get(&inst.id))
                .map(|f| decompose_loss(f, &restricted, &inst.actual, inst.scale))
                .transpose()?;
            Ok(OracleRow {
                id: inst.id.clone(),
                scale: inst.scale,
                selection: pool[best],
                selection_mase: loss / (inst.actual.len() as f64 * inst.scale),
                decomposition,
                solution,
            })
        })
        .collect::<donut_core::Result<_>>()?;
    let n = rows.len() as f64;
    let decomposed: Vec<&LossDecomposition> = rows.iter().filter_map(|r| r.decomposition.as_ref()).collect();
    let dmean = |f: fn(&LossDecomposition) -> f64| {
        (!decomposed.is_empty()).then(|| decomposed.iter().map(|d| f(d)).sum::<f64>() / decomposed.len() as f64)
    };
    let mut selection_counts: BTreeMap<String, usize> = pool.iter().map(|m| (m.name().to_string(), 0)).collect();
    for r in &rows {
        *selection_counts.entry(r.selection.name().to_string()).or_default() += 1;
    }
    let comb = rows.iter().map(|r| r.solution.e_loss_mase(r.scale)).sum::<f64>() / n;
    let sel = rows.iter().map(|r| r.selection_mase).sum::<f64>() / n;
    let solutions: Vec<OracleSolution> = rows.iter().map(|r| r.solution.clone()).collect();
    let summary = OracleSummary {
        pool: pool.to_vec(),
        n: rows.len(),
        mean_combination_mase: comb,
        mean_selection_mase: sel,
        combination_gain: if sel > 0.0 { 1.0 - comb / sel } else { 0.0 },
        histogram: size_histogram(&solutions, ACTIVE_EPS),
        selection_counts,
        decomposed: decomposed.len(),
        mean_total_loss: dmean(|d| d.total_loss),
        mean_p_loss: dmean(|d| d.p_loss),
        mean_e_loss: dmean(|d| d.e_loss),
    };
    Ok((rows, summary))
}

pub fn greedy(instances: &[OracleInstance], pool: &[ModelId]) -> Result<GreedyResult> {
    Ok(greedy_build(instances, pool)?)
}

/// Feature importance, clustering and cluster importance of a trained net.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceResult {
    pub features: Vec<ImportanceRecord>,
    pub dendrogram: Dendrogram,
    pub labels: Vec<usize>,
    pub clusters: Vec<ImportanceRecord>,
}

/// Feature clustering on standardized features of `samples`.
pub fn cluster(samples: &[WnSample], k: usize) -> Result<(Dendrogram, Vec<usize>)> {
    let table: Vec<Vec<f64>> = samples.iter().map(|s| s.features.clone()).collect();
    let d = cluster_features(&table, &feature_names())?;
    let k = k.min(d.n_leaves());
    let labels = d.cut(k)?;
    Ok((d, labels))
}

pub fn importance(net: &WeightNet, samples: &[WnSample], k: usize, seed: u64, repeats: usize) -> Result<ImportanceResult> {
    let features = feature_importance(net, samples, &feature_names(), seed, repeats)?;
    let (dendrogram, labels) = cluster(samples, k)?;
    let n_clusters = labels.iter().max().map_or(0, |m| m + 1);
    let mut groups = vec![Vec::new(); n_clusters];
    for (j, &c) in labels.iter().enumerate() {
        groups[c].push(j);
    }
    let clusters = cluster_importance(net, samples, &groups, seed, repeats)?;
    Ok(ImportanceResult {
        features,
        dendrogram,
        labels,
        clusters,
    })
}

/// Per-series OWA of one method as analysis records.
pub fn owa_records(eval: &Evaluation, method: &str, role: Option<Role>) -> Vec<SeriesOwa> {
    eval.series
        .iter()
        .filter(|e| e.method == method && role.is_none_or(|r| e.role.as_deref() == Some(r.as_str())))
        .map(|e| SeriesOwa {
            id: e.id.clone(),
            period: e.period,
            series_type: e.series_type,
            owa: e.scores.owa(),
        })
        .collect()
}

/// Tables behind the report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportData {
    pub breakdown: OwaBreakdown,
    pub versus_uniform: Vec<BucketCell>,
    pub usage: UsageStats,
}

pub fn report_data(
    eval: &Evaluation,
    weights: &[(String, Vec<f64>)],
    roles: Option<&BTreeMap<String, Role>>,
    alpha: f64,
) -> Result<ReportData> {
    let role = roles.map(|_| Role::Validation);
    let donut = owa_records(eval, DONUT_METHOD, role);
    let uniform = owa_records(eval, UNIFORM_METHOD, role);
    let breakdown = owa_breakdown(&donut)?;
    let versus_uniform = compare_buckets(&donut, &uniform, &Bucketing::TypePeriod, alpha)?;
    let in_subset: Vec<Vec<f64>> = weights
        .iter()
        .filter(|(id, _)| roles.is_none_or(|r| r.get(id) == Some(&Role::Validation)))
        .map(|(_, w)| w.clone())
        .collect();
    Ok(ReportData {
        breakdown,
        versus_uniform,
        usage: ensemble_usage_stats(&in_subset, DEFAULT_USAGE_THRESHOLD),
    })
}
