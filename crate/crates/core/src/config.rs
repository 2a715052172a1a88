//! TOML run configuration.
//!
//! ```toml
//! [model]
//! kind = "mlp"
//! hidden_size = 32
//!
//! [train]
//! total_epochs = 30
//! warmup_epochs = 5
//! beta0 = 0.75
//! beta1 = 0.55
//!
//! [train.alpha]
//! k = 0.05
//!
//! [noise]
//! noise_rate = 0.3
//! ```
//!
//! Every key is optional; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{RaclError, Result};
use crate::model::{ModelKind, ModelSpec};
use crate::noise::NoiseConfig;
use crate::trainer::TrainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub kind: ModelKind,
    /// Hidden width, used by `mlp` only.
    pub hidden_size: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { kind: ModelKind::LinearSoftmax, hidden_size: 16 }
    }
}

impl ModelSection {
    pub fn spec(&self, input_dim: usize) -> ModelSpec {
        match self.kind {
            ModelKind::LinearSoftmax => ModelSpec::linear(input_dim),
            ModelKind::Mlp => ModelSpec::mlp(input_dim, self.hidden_size),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsSection {
    pub data: Option<PathBuf>,
    pub val: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub log: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Number of classes; inferred from the data when absent.
    pub num_classes: Option<usize>,
    pub model: ModelSection,
    pub train: TrainConfig,
    pub noise: NoiseConfig,
    pub paths: PathsSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            num_classes: None,
            model: ModelSection::default(),
            train: TrainConfig::default(),
            noise: NoiseConfig::new(0.2, 0),
            paths: PathsSection::default(),
        }
    }
}

impl RunConfig {
    /// Syntax errors are parse failures; unknown keys and out-of-range values
    /// are configuration errors.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| RaclError::Parse(e.to_string()))?;
        let cfg: RunConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| RaclError::InvalidConfig(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run config serializes to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(k) = self.num_classes {
            if k < 2 {
                return Err(RaclError::InvalidConfig(format!("num_classes={k} must be at least 2")));
            }
        }
        if self.model.kind == ModelKind::Mlp && self.model.hidden_size == 0 {
            return Err(RaclError::InvalidConfig("model.hidden_size must be positive".into()));
        }
        self.train.validate()?;
        self.noise.validate()
    }
}
