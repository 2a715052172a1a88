//! Synthetic noisy-label comparison of the credal loss against baselines.

use serde::{Deserialize, Serialize};

use crate::error::{RaclError, Result};
use crate::losses::FocalConfig;
use crate::model::{ModelKind, ModelSpec};
use crate::noise::{self, adjacent_grade_map, LogisticScorer, NoiseConfig, SelectionMode};
use crate::trainer::{self, LossKind, TrainConfig};

pub const DEMO_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DemoConfig {
    pub num_classes: usize,
    pub n_per_class: usize,
    pub test_per_class: usize,
    pub dim: usize,
    pub separation: f64,
    pub noise_rate: f64,
    pub proxy_fraction: f64,
    pub selection: SelectionMode,
    pub model: ModelKind,
    pub hidden_size: usize,
    pub seed: u64,
    pub train: TrainConfig,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            num_classes: 3,
            n_per_class: 1000,
            test_per_class: 500,
            dim: 2,
            separation: 5.0,
            noise_rate: 0.3,
            proxy_fraction: 0.3,
            selection: SelectionMode::LossRanked,
            model: ModelKind::Mlp,
            hidden_size: 64,
            seed: 0,
            train: TrainConfig::default(),
        }
    }
}

impl DemoConfig {
    pub fn model_spec(&self) -> ModelSpec {
        match self.model {
            ModelKind::LinearSoftmax => ModelSpec::linear(self.dim),
            ModelKind::Mlp => ModelSpec::mlp(self.dim, self.hidden_size),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmResult {
    pub arm: String,
    pub clean_test_accuracy: f64,
    pub auc_macro: f64,
    pub ap_macro: f64,
    pub f1_macro: f64,
    /// Accuracy against the clean label on flipped training samples.
    pub flipped_train_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoSummary {
    pub format_version: u32,
    pub config: DemoConfig,
    pub num_train: usize,
    pub num_flipped: usize,
    pub arms: Vec<ArmResult>,
}

impl DemoSummary {
    pub fn arm(&self, name: &str) -> Option<&ArmResult> {
        self.arms.iter().find(|a| a.arm == name)
    }

    pub fn table(&self) -> String {
        let mut out = format!(
            "{:<12} {:>9} {:>9} {:>9} {:>9} {:>9}\n",
            "arm", "test_acc", "auc", "ap", "f1", "flip_acc"
        );
        for a in &self.arms {
            let flip = a.flipped_train_accuracy.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "{:<12} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9}\n",
                a.arm, a.clean_test_accuracy, a.auc_macro, a.ap_macro, a.f1_macro, flip
            ));
        }
        out
    }
}

pub const ARMS: [&str; 4] = ["ce", "focal", "racl", "racl+focal"];

/// Blobs, adjacent-class noise on the training split, four training arms,
/// evaluation on a separately drawn clean test set.
pub fn run_demo(cfg: &DemoConfig) -> Result<DemoSummary> {
    if cfg.num_classes < 2 {
        return Err(RaclError::InvalidConfig("demo needs at least 2 classes".into()));
    }
    cfg.train.validate()?;
    let spec = cfg.model_spec();
    spec.validate()?;
    let k = cfg.num_classes;
    let pool = trainer::synth_blobs(k, cfg.n_per_class, cfg.dim, cfg.separation, cfg.seed)?;
    let test = trainer::synth_blobs(
        k,
        cfg.test_per_class,
        cfg.dim,
        cfg.separation,
        cfg.seed.wrapping_add(0x5EED),
    )?;
    let map = adjacent_grade_map(k)?;
    let noise_cfg = NoiseConfig {
        noise_rate: cfg.noise_rate,
        proxy_fraction: cfg.proxy_fraction,
        seed: cfg.seed,
        mode: cfg.selection,
    };
    let outcome = noise::generate(&pool, &map, &noise_cfg, &LogisticScorer::default())?;
    let train = outcome.noisy.observed();

    let mut arms = Vec::new();
    for arm in ARMS {
        let (model, _) = match arm {
            "ce" => trainer::fit_baseline(&train, &spec, k, &cfg.train, LossKind::Ce, None)?,
            "focal" => trainer::fit_baseline(&train, &spec, k, &cfg.train, LossKind::Focal, None)?,
            _ => {
                let lambda_mix = if arm == "racl" { 1.0 } else { cfg.train.focal.lambda_mix };
                let tc = TrainConfig {
                    focal: FocalConfig { lambda_mix, ..cfg.train.focal },
                    ..cfg.train.clone()
                };
                trainer::fit_racl(&train, &spec, k, &tc, None)?
            }
        };
        let eval = trainer::evaluate(&model, &test)?;
        let noisy_eval = trainer::evaluate_noisy(&model, &outcome.noisy)?;
        arms.push(ArmResult {
            arm: arm.to_string(),
            clean_test_accuracy: eval.accuracy,
            auc_macro: eval.auc_macro,
            ap_macro: eval.ap_macro,
            f1_macro: eval.f1_macro,
            flipped_train_accuracy: noisy_eval.flipped_accuracy,
        });
    }
    Ok(DemoSummary {
        format_version: DEMO_FORMAT_VERSION,
        config: cfg.clone(),
        num_train: train.len(),
        num_flipped: outcome.noisy.num_flipped(),
        arms,
    })
}
