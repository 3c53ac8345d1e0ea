use std::path::Path;

use serde::{Deserialize, Serialize};

use super::optim::AdamW;
use super::Parameterized;
use crate::error::{Error, Result};

pub const CHECKPOINT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub shape: [usize; 2],
    pub values: Vec<f64>,
}

/// Serialisable snapshot of a model, its optimiser and arbitrary
/// model-specific metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema_version: u32,
    pub kind: String,
    pub seed: u64,
    pub epoch: usize,
    pub layers: Vec<NamedTensor>,
    pub optimizer: Option<AdamW>,
    #[serde(default)]
    pub metadata: serde_json::Value,
}

impl Checkpoint {
    pub fn capture<M: Parameterized>(kind: &str, model: &M, optimizer: Option<&AdamW>, seed: u64, epoch: usize) -> Self {
        let layers = model
            .param_names()
            .into_iter()
            .zip(model.params())
            .map(|(name, t)| NamedTensor {
                name,
                shape: [t.rows, t.cols],
                values: t.data.clone(),
            })
            .collect();
        Checkpoint {
            schema_version: CHECKPOINT_SCHEMA_VERSION,
            kind: kind.to_string(),
            seed,
            epoch,
            layers,
            optimizer: optimizer.cloned(),
            metadata: serde_json::Value::Null,
        }
    }

    /// Copies stored tensors into `model`, checking names and shapes.
    pub fn restore_into<M: Parameterized>(&self, model: &mut M) -> Result<()> {
        if self.schema_version != CHECKPOINT_SCHEMA_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported checkpoint schema version {}",
                self.schema_version
            )));
        }
        let names = model.param_names();
        if names.len() != self.layers.len() {
            return Err(Error::shape(names.len(), self.layers.len()));
        }
        for ((name, t), stored) in names.iter().zip(model.params_mut()).zip(&self.layers) {
            if *name != stored.name {
                return Err(Error::InvalidArgument(format!(
                    "checkpoint layer {} where {} was expected",
                    stored.name, name
                )));
            }
            if [t.rows, t.cols] != stored.shape || stored.values.len() != t.data.len() {
                return Err(Error::shape(t.data.len(), stored.values.len()));
            }
            t.data.copy_from_slice(&stored.values);
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}
