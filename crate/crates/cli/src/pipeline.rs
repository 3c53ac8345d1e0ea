//! `run-all`: the staged pipeline with a digest manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};

use crate::artifacts::{digest_file, read_json, write_json};
use crate::config::{PipelineConfig, StageSeeds};
use crate::error::{CliError, Result};
use crate::persist;
use crate::stages;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// Relative paths of the work directory.
pub mod files {
    pub const CORPUS_DIR: &str = "corpus";
    pub const TRAIN: &str = "corpus/train.csv";
    pub const META: &str = "corpus/meta.csv";
    pub const FORECASTS: &str = "forecasts.csv";
    pub const STAT_FEATURES: &str = "stat_features.csv";
    pub const AE: &str = "ae.json";
    pub const EMBEDDINGS: &str = "lstm_features.csv";
    pub const WEIGHTNET: &str = "wn.json";
    pub const SPLIT: &str = "split.csv";
    pub const WEIGHTS: &str = "weights.csv";
    pub const FINAL_FORECASTS: &str = "final_forecasts.csv";
    pub const EVALUATION: &str = "evaluation.csv";
    pub const ORACLE: &str = "oracle.csv";
    pub const ORACLE_SUMMARY: &str = "oracle.json";
    pub const CURVE: &str = "curve.csv";
    pub const IMPORTANCE: &str = "importance.csv";
    pub const DENDROGRAM: &str = "dendrogram.json";
    pub const CLUSTERS: &str = "clusters.csv";
    pub const CLUSTER_IMPORTANCE: &str = "cluster_importance.csv";
    pub const REPORT_DIR: &str = "report";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    /// Relative (or external absolute) path → SHA-256.
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

/// Record of a completed run. Wall-clock timings are reported by
/// [`RunOutcome`] and the log only, so the work directory stays
/// byte-identical across repeated runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub config_hash: String,
    pub config: PipelineConfig,
    pub seeds: StageSeeds,
    pub stages: Vec<StageRecord>,
}

impl RunManifest {
    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.stage == name)
    }

    pub fn load(work_dir: &Path) -> Result<Option<Self>> {
        let path = work_dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(None);
        }
        read_json(&path).map(Some)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageTiming {
    pub stage: String,
    pub skipped: bool,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub timings: Vec<StageTiming>,
}

impl RunOutcome {
    pub fn executed(&self) -> Vec<&str> {
        self.timings.iter().filter(|t| !t.skipped).map(|t| t.stage.as_str()).collect()
    }
}

pub const STAGES: [&str; 12] = [
    "ingest",
    "forecast",
    "features",
    "train-ae",
    "encode",
    "train-weightnet",
    "predict",
    "evaluate",
    "oracle",
    "greedy",
    "importance",
    "report",
];

fn stage_io(stage: &str, config: &PipelineConfig) -> (Vec<String>, Vec<String>) {
    use files::*;
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let corpus = [TRAIN, META];
    let joined = [TRAIN, META, FORECASTS, STAT_FEATURES, EMBEDDINGS];
    match stage {
        "ingest" => {
            let inputs = match &config.corpus {
                Some(dir) => vec![
                    path_key(&dir.join(donut_core::corpus::TRAIN_FILE)),
                    path_key(&dir.join(donut_core::corpus::META_FILE)),
                ],
                None => Vec::new(),
            };
            (inputs, s(&corpus))
        }
        "forecast" => (s(&corpus), s(&[FORECASTS])),
        "features" => (s(&corpus), s(&[STAT_FEATURES])),
        "train-ae" => (s(&corpus), s(&[AE])),
        "encode" => (s(&[TRAIN, META, AE]), s(&[EMBEDDINGS])),
        "train-weightnet" => (s(&joined), s(&[WEIGHTNET, SPLIT])),
        "predict" => (
            s(&[TRAIN, META, FORECASTS, STAT_FEATURES, EMBEDDINGS, WEIGHTNET]),
            s(&[WEIGHTS, FINAL_FORECASTS]),
        ),
        "evaluate" => (s(&[TRAIN, META, FORECASTS, FINAL_FORECASTS, SPLIT]), s(&[EVALUATION])),
        "oracle" => (s(&[TRAIN, META, FORECASTS, FINAL_FORECASTS]), s(&[ORACLE, ORACLE_SUMMARY])),
        "greedy" => (s(&[TRAIN, META, FORECASTS]), s(&[CURVE])),
        "importance" => (
            s(&[TRAIN, META, FORECASTS, STAT_FEATURES, EMBEDDINGS, WEIGHTNET, SPLIT]),
            s(&[IMPORTANCE, DENDROGRAM, CLUSTERS, CLUSTER_IMPORTANCE]),
        ),
        "report" => (
            s(&[EVALUATION, WEIGHTS, SPLIT, ORACLE_SUMMARY, CURVE, IMPORTANCE, CLUSTER_IMPORTANCE]),
            persist::REPORT_FILES.iter().map(|f| format!("{REPORT_DIR}/{f}")).collect(),
        ),
        other => unreachable!("unknown stage {other}"),
    }
}

fn path_key(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn resolve(work: &Path, key: &str) -> PathBuf {
    let p = Path::new(key);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        work.join(p)
    }
}

fn digests(work: &Path, keys: &[String]) -> Result<BTreeMap<String, String>> {
    keys.iter().map(|k| Ok((k.clone(), digest_file(&resolve(work, k))?))).collect()
}

/// Current digests of `keys`, `None` when any file is missing.
fn current_digests(work: &Path, keys: &[String]) -> Option<BTreeMap<String, String>> {
    keys.iter()
        .map(|k| digest_file(&resolve(work, k)).ok().map(|d| (k.clone(), d)))
        .collect()
}

struct Ctx<'a> {
    work: &'a Path,
    config: &'a PipelineConfig,
    seeds: StageSeeds,
}

impl Ctx<'_> {
    fn p(&self, rel: &str) -> PathBuf {
        self.work.join(rel)
    }

    fn corpus(&self) -> Result<Vec<donut_core::TimeSeries>> {
        persist::read_corpus(&self.p(files::CORPUS_DIR))
    }

    fn inputs(&self) -> Result<Vec<stages::SeriesInputs>> {
        stages::assemble(
            &self.corpus()?,
            &persist::read_forecast_matrices(&self.p(files::FORECASTS))?,
            &persist::read_stats(&self.p(files::STAT_FEATURES))?,
            &persist::read_embeddings(&self.p(files::EMBEDDINGS))?,
        )
    }

    fn run(&self, stage: &str) -> Result<()> {
        use files::*;
        let cfg = self.config;
        match stage {
            "ingest" => {
                let corpus = match &cfg.corpus {
                    Some(dir) => persist::read_corpus(dir)?,
                    None => stages::synthesize(cfg.synthetic_series, cfg.synthetic_seed)?,
                };
                persist::write_corpus(&self.p(CORPUS_DIR), &corpus)?;
            }
            "forecast" => persist::write_forecast_matrices(&self.p(FORECASTS), &stages::forecast(&self.corpus()?))?,
            "features" => persist::write_stats(&self.p(STAT_FEATURES), &stages::stat_features(&self.corpus()?))?,
            "train-ae" => {
                let trained = stages::train_ae(&self.corpus()?, &cfg.ae, self.seeds.autoencoder)?;
                persist::write_ae(&self.p(AE), &trained)?;
            }
            "encode" => {
                let model = persist::read_ae(&self.p(AE))?;
                persist::write_embeddings(&self.p(EMBEDDINGS), &stages::encode(&model, &self.corpus()?)?)?;
            }
            "train-weightnet" => {
                let inputs = self.inputs()?;
                let roles = stages::split_roles(&inputs, cfg.weightnet.train_fraction, self.seeds.partition)?;
                let map: BTreeMap<_, _> = roles.iter().cloned().collect();
                let trained = stages::train_weightnet(&inputs, &map, &cfg.weightnet, self.seeds.weightnet)?;
                persist::write_roles(&self.p(SPLIT), &roles)?;
                persist::write_weightnet(&self.p(WEIGHTNET), &trained)?;
            }
            "predict" => {
                let net = persist::read_weightnet(&self.p(WEIGHTNET))?;
                let preds = stages::predict(&net, &self.inputs()?)?;
                persist::write_predictions(&self.p(WEIGHTS), &self.p(FINAL_FORECASTS), &preds)?;
            }
            "evaluate" => {
                let methods = persist::read_methods(&[self.p(FORECASTS), self.p(FINAL_FORECASTS)])?;
                let roles = persist::read_roles(&self.p(SPLIT))?;
                let eval = stages::evaluate(&self.corpus()?, &methods, Some(&roles))?;
                persist::write_evaluation(&self.p(EVALUATION), &eval)?;
            }
            "oracle" => {
                let instances = stages::oracle_instances(&self.corpus()?, &persist::read_forecast_matrices(&self.p(FORECASTS))?);
                let finals = persist::read_methods(&[self.p(FINAL_FORECASTS)])?;
                let combined = finals.iter().find(|(m, _)| m == stages::DONUT_METHOD).map(|(_, f)| f);
                let (rows, summary) = stages::oracle(&instances, &cfg.pool, combined)?;
                persist::write_oracle(&self.p(ORACLE), &self.p(ORACLE_SUMMARY), &rows, &summary)?;
            }
            "greedy" => {
                let instances = stages::oracle_instances(&self.corpus()?, &persist::read_forecast_matrices(&self.p(FORECASTS))?);
                persist::write_curve(&self.p(CURVE), &stages::greedy(&instances, &cfg.pool)?)?;
            }
            "importance" => {
                let net = persist::read_weightnet(&self.p(WEIGHTNET))?;
                let inputs = self.inputs()?;
                let roles = persist::read_roles(&self.p(SPLIT))?;
                let (_, val, _) = stages::role_samples(&inputs, &roles, net.standardizer.as_ref())?;
                let r = stages::importance(&net, &val, cfg.clusters, self.seeds.importance, cfg.importance_repeats)?;
                persist::write_importance(&self.p(IMPORTANCE), &r.features)?;
                persist::write_clusters(&self.p(DENDROGRAM), &self.p(CLUSTERS), &r.dendrogram, &r.labels)?;
                persist::write_importance(&self.p(CLUSTER_IMPORTANCE), &r.clusters)?;
            }
            "report" => {
                let eval = persist::read_evaluation(&self.p(EVALUATION))?;
                let roles = persist::read_roles(&self.p(SPLIT))?;
                let weights = persist::read_weights(&self.p(WEIGHTS))?;
                let data = stages::report_data(&eval, &weights, Some(&roles), cfg.alpha)?;
                let oracle: stages::OracleSummary = read_json(&self.p(ORACLE_SUMMARY))?;
                let curve = persist::read_curve(&self.p(CURVE))?;
                let importance = persist::read_importance(&self.p(IMPORTANCE))?;
                let clusters = persist::read_importance(&self.p(CLUSTER_IMPORTANCE))?;
                persist::write_report(
                    &self.p(REPORT_DIR),
                    &persist::ReportInputs {
                        eval: &eval,
                        data: &data,
                        oracle: Some(&oracle),
                        curve: Some(&curve),
                        importance: &importance,
                        cluster_importance: &clusters,
                        target_owa: cfg.target_owa.map(|t| (t, cfg.target_tolerance)),
                    },
                )?;
            }
            other => unreachable!("unknown stage {other}"),
        }
        Ok(())
    }
}

/// Config as stored in the manifest: machine-local fields are cleared.
fn portable(config: &PipelineConfig) -> PipelineConfig {
    let mut c = config.clone();
    c.work_dir = PathBuf::new();
    c.threads = 0;
    c
}

/// Runs every stage in order, skipping stages whose inputs, outputs and
/// config are unchanged since the last run. Once a stage runs, every later
/// stage runs as well.
pub fn run_all(config: &PipelineConfig) -> Result<RunOutcome> {
    config.validate()?;
    let work = config.work_dir.clone();
    std::fs::create_dir_all(&work).map_err(|e| CliError::io(&work, e))?;
    let previous = RunManifest::load(&work).ok().flatten();
    let hash = config.hash();
    let seeds = config.seeds();
    let mut manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        config_hash: hash.clone(),
        config: portable(config),
        seeds,
        stages: Vec::new(),
    };
    let ctx = Ctx {
        work: &work,
        config,
        seeds,
    };
    let reusable = previous.filter(|m| m.config_hash == hash && m.schema_version == MANIFEST_SCHEMA_VERSION);
    let mut dirty = false;
    let mut timings = Vec::new();
    for stage in STAGES {
        let (inputs, outputs) = stage_io(stage, config);
        let start = Instant::now();
        let prior = reusable.as_ref().and_then(|m| m.stage(stage));
        let unchanged = !dirty
            && prior.is_some_and(|p| {
                current_digests(&work, &inputs).as_ref() == Some(&p.inputs)
                    && current_digests(&work, &outputs).as_ref() == Some(&p.outputs)
            });
        let record = if unchanged {
            info!("stage {stage}: up to date");
            prior.expect("checked above").clone()
        } else {
            dirty = true;
            info!("stage {stage}: running");
            let input_digests = digests(&work, &inputs).map_err(|e| e.in_stage(stage))?;
            ctx.run(stage).map_err(|e| e.in_stage(stage))?;
            StageRecord {
                stage: stage.to_string(),
                inputs: input_digests,
                outputs: digests(&work, &outputs).map_err(|e| e.in_stage(stage))?,
            }
        };
        let seconds = start.elapsed().as_secs_f64();
        info!("stage {stage}: {seconds:.2} s");
        timings.push(StageTiming {
            stage: stage.to_string(),
            skipped: unchanged,
            seconds,
        });
        manifest.stages.push(record);
        if !unchanged {
            write_json(&work.join(MANIFEST_FILE), &manifest)?;
        }
    }
    write_json(&work.join(MANIFEST_FILE), &manifest)?;
    Ok(RunOutcome { manifest, timings })
}

/// Files under `work` (other than the manifest) not produced by exactly one
/// stage, and manifest outputs that are missing.
pub fn manifest_discrepancies(work: &Path, manifest: &RunManifest) -> Result<Vec<String>> {
    let mut owners: BTreeMap<String, usize> = BTreeMap::new();
    for s in &manifest.stages {
        for k in s.outputs.keys() {
            *owners.entry(k.clone()).or_default() += 1;
        }
    }
    let mut problems = Vec::new();
    let mut stack = vec![work.to_path_buf()];
    let mut seen = Vec::new();
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).map_err(|e| CliError::io(&dir, e))? {
            let path = entry.map_err(|e| CliError::io(&dir, e))?.path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let rel = path
                .strip_prefix(work)
                .expect("walk stays inside the work dir")
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect::<Vec<_>>()
                .join("/");
            if rel == MANIFEST_FILE {
                continue;
            }
            match owners.get(&rel) {
                Some(1) => seen.push(rel),
                Some(n) => problems.push(format!("{rel} is claimed by {n} stages")),
                None => problems.push(format!("{rel} is not in the manifest")),
            }
        }
    }
    for k in owners.keys() {
        if !seen.contains(k) && owners[k] == 1 {
            problems.push(format!("{k} is listed but missing"));
        }
    }
    problems.sort();
    Ok(problems)
}
