//! Pipeline configuration and the two shipped presets.

use std::path::{Path, PathBuf};

use donut_core::analysis::{derive_seed, DEFAULT_CLUSTERS, DEFAULT_REPEATS};
use donut_core::autoencoder::AeConfig;
use donut_core::weight_net::WeightNetConfig;
use donut_core::ModelId;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Environment variable that overrides the configured work directory.
pub const WORKDIR_ENV: &str = "DONUT_WORKDIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Directory holding `train.csv` and `meta.csv`; `None` generates the
    /// synthetic desk corpus instead.
    pub corpus: Option<PathBuf>,
    pub work_dir: PathBuf,
    pub synthetic_series: usize,
    pub synthetic_seed: u64,
    pub ae: AeConfig,
    pub weightnet: WeightNetConfig,
    pub pool: Vec<ModelId>,
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
    pub desk_scale: bool,
    pub importance_repeats: usize,
    pub clusters: usize,
    /// Significance level for per-bucket comparisons in the report.
    pub alpha: f64,
    /// Reference OWA printed by paper-scale runs.
    pub target_owa: Option<f64>,
    pub target_tolerance: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig::desk()
    }
}

/// Named random streams of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSeeds {
    pub partition: u64,
    pub autoencoder: u64,
    pub weightnet: u64,
    pub importance: u64,
}

impl PipelineConfig {
    pub fn desk() -> Self {
        PipelineConfig {
            corpus: None,
            work_dir: PathBuf::from("donut-work"),
            synthetic_series: 2000,
            synthetic_seed: 42,
            ae: AeConfig::desk(),
            weightnet: WeightNetConfig::desk(),
            pool: ModelId::ALL.to_vec(),
            seed: 42,
            threads: 1,
            desk_scale: true,
            importance_repeats: DEFAULT_REPEATS,
            clusters: DEFAULT_CLUSTERS,
            alpha: 0.01,
            target_owa: None,
            target_tolerance: 0.02,
        }
    }

    pub fn paper() -> Self {
        PipelineConfig {
            ae: AeConfig::paper(),
            weightnet: WeightNetConfig::paper(),
            threads: 0,
            desk_scale: false,
            target_owa: Some(0.830),
            ..PipelineConfig::desk()
        }
    }

    /// Swaps in the desk hyperparameter tables, keeping everything else.
    pub fn with_desk_scale(mut self) -> Self {
        self.ae = AeConfig::desk();
        self.weightnet = WeightNetConfig::desk();
        self.desk_scale = true;
        self
    }

    /// Swaps in the full-size hyperparameter tables and the reference OWA.
    pub fn with_paper_scale(mut self) -> Self {
        let paper = PipelineConfig::paper();
        self.ae = paper.ae;
        self.weightnet = paper.weightnet;
        self.desk_scale = false;
        self.target_owa = paper.target_owa;
        self
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut config: PipelineConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        // Relative corpus paths are taken relative to the config file.
        if let (Some(corpus), Some(dir)) = (&config.corpus, path.parent()) {
            if corpus.is_relative() && !corpus.exists() {
                config.corpus = Some(dir.join(corpus));
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.pool.is_empty() {
            return bad("pool must name at least one model".into());
        }
        if let Some(corpus) = &self.corpus {
            if !corpus.is_dir() {
                return bad(format!("corpus directory {} does not exist", corpus.display()));
            }
        } else if self.synthetic_series < 10 {
            return bad("synthetic_series must be at least 10".into());
        }
        if self.importance_repeats < 2 {
            return bad("importance_repeats must be at least 2".into());
        }
        if self.clusters == 0 {
            return bad("clusters must be positive".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)".into());
        }
        self.ae.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.weightnet.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.ae.embedding_dim != donut_core::weight_net::EMBEDDING_DIM {
            return bad(format!(
                "ae.embedding_dim must be {} to feed the weighting network",
                donut_core::weight_net::EMBEDDING_DIM
            ));
        }
        Ok(())
    }

    /// SHA-256 of everything that influences results. The work directory
    /// and the thread count are excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.work_dir = PathBuf::new();
        c.threads = 0;
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn seeds(&self) -> StageSeeds {
        StageSeeds {
            partition: derive_seed(self.seed, 1, 0),
            autoencoder: derive_seed(self.seed, 2, 0),
            weightnet: derive_seed(self.seed, 3, 0),
            importance: derive_seed(self.seed, 4, 0),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }
}

/// Command-line overrides applied on top of a loaded configuration.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub work_dir: Option<PathBuf>,
    pub env_work_dir: Option<PathBuf>,
}

impl Overrides {
    /// Loads the base config (desk preset when none is given), then applies
    /// the work-dir environment variable and the explicit flags, flags last.
    pub fn resolve(&self) -> Result<PipelineConfig> {
        let mut config = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::desk(),
        };
        if let Some(dir) = &self.env_work_dir {
            config.work_dir = dir.clone();
        }
        if let Some(dir) = &self.work_dir {
            config.work_dir = dir.clone();
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(threads) = self.threads {
            config.threads = threads;
        }
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_workdir_and_threads() {
        let a = PipelineConfig::desk();
        let mut b = a.clone();
        b.work_dir = "elsewhere".into();
        b.threads = 8;
        assert_eq!(a.hash(), b.hash());
        b.seed = 7;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn presets_validate_and_round_trip() {
        for c in [PipelineConfig::desk(), PipelineConfig::paper()] {
            c.validate().unwrap();
            let back: PipelineConfig = serde_json::from_str(&c.to_json()).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn empty_pool_is_a_config_error() {
        let c = PipelineConfig {
            pool: vec![],
            ..PipelineConfig::desk()
        };
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn stage_seeds_differ() {
        let s = PipelineConfig::desk().seeds();
        let all = [s.partition, s.autoencoder, s.weightnet, s.importance];
        for i in 0..4 {
            for j in i + 1..4 {
                assert_ne!(all[i], all[j]);
            }
        }
    }
}
