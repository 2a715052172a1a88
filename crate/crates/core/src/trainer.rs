//! Seeded training harness.
//!
//! A run is a cross-entropy warm-up followed by a main phase. For the credal
//! loss, the warm-up ends with one full forward pass whose per-sample losses
//! fix τ, the class error rates and α(c); the main phase then minimizes the
//! λ-mixture of the credal and focal losses while β follows the cosine
//! schedule. Baseline runs share the phase structure and the shuffling.
//!
//! Everything that consumes randomness is keyed by the run seed, and batch
//! reductions sum in ascending sample index, so a run is bitwise repeatable.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::credal::{beta_at, BetaSchedule};
use crate::data::{Dataset, Sample};
use crate::error::{RaclError, Result};
use crate::losses::{self, AlphaSelector, FocalConfig, RaclConfig};
use crate::metrics::{self, EvalResult};
use crate::model::{Model, ModelSpec};
use crate::noise::{seeded_stream, NoisyDataset};
use crate::prob::{softmax_slice, LabelSpace, ProbDist};
use crate::relax::{self, AlphaParams, ClassErrorRates, TauPolicy, WarmupLossRecord};

pub const LOG_FORMAT_VERSION: u32 = 1;

const STREAM_INIT: u64 = 11;
const STREAM_BLOBS: u64 = 12;

/// Loss minimized in the main phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Racl,
    Ce,
    Focal,
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LossKind::Racl => "racl",
            LossKind::Ce => "ce",
            LossKind::Focal => "focal",
        })
    }
}

/// Which epochs the β schedule counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleIndexing {
    /// `t` counts main-phase epochs from 0; the last main epoch reaches β₁.
    #[default]
    MainPhase,
    /// `t` is the global epoch, warm-up included.
    AllEpochs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub total_epochs: usize,
    pub warmup_epochs: usize,
    pub learning_rate: f64,
    pub warmup_learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub beta0: f64,
    pub beta1: f64,
    pub schedule_indexing: ScheduleIndexing,
    pub alpha: AlphaParams,
    pub focal: FocalConfig,
    pub tau_policy: TauPolicy,
    pub alpha_selector: AlphaSelector,
    /// Re-estimate e(c) and α(c) at the start of every main-phase epoch
    /// instead of freezing the post-warm-up values.
    pub reestimate_alpha: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            total_epochs: 30,
            warmup_epochs: 5,
            learning_rate: 0.05,
            warmup_learning_rate: 0.005,
            momentum: 0.9,
            batch_size: 32,
            seed: 0,
            beta0: 0.75,
            beta1: 0.55,
            schedule_indexing: ScheduleIndexing::MainPhase,
            alpha: AlphaParams::default(),
            focal: FocalConfig::default(),
            tau_policy: TauPolicy::Mean,
            alpha_selector: AlphaSelector::ObservedLabel,
            reestimate_alpha: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(RaclError::InvalidConfig(m));
        if self.total_epochs == 0 {
            return bad("total_epochs must be positive".into());
        }
        if self.warmup_epochs >= self.total_epochs {
            return bad(format!(
                "warmup_epochs={} must be below total_epochs={}",
                self.warmup_epochs, self.total_epochs
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate={} must be positive", self.learning_rate));
        }
        if !(self.warmup_learning_rate > 0.0 && self.warmup_learning_rate.is_finite()) {
            return bad(format!(
                "warmup_learning_rate={} must be positive",
                self.warmup_learning_rate
            ));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!("momentum={} outside [0, 1)", self.momentum));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        if let TauPolicy::Quantile { q } = self.tau_policy {
            if !(0.0..=1.0).contains(&q) {
                return bad(format!("tau quantile {q} outside [0, 1]"));
            }
        }
        self.alpha.validate()?;
        self.focal.validate()?;
        self.beta_schedule()?;
        Ok(())
    }

    pub fn main_epochs(&self) -> usize {
        self.total_epochs - self.warmup_epochs
    }

    /// Schedule whose endpoints land on the first and last main-phase epoch
    /// (or on epoch 0 and the last epoch with [`ScheduleIndexing::AllEpochs`]).
    pub fn beta_schedule(&self) -> Result<BetaSchedule> {
        let t_max = match self.schedule_indexing {
            ScheduleIndexing::MainPhase => self.main_epochs().saturating_sub(1),
            ScheduleIndexing::AllEpochs => self.total_epochs - 1,
        };
        BetaSchedule::new(self.beta0, self.beta1, t_max.max(1))
    }

    /// β for a main-phase epoch index `t` (0-based).
    pub fn beta_for_main_epoch(&self, t: usize) -> Result<f64> {
        let schedule = self.beta_schedule()?;
        let idx = match self.schedule_indexing {
            ScheduleIndexing::MainPhase => t,
            ScheduleIndexing::AllEpochs => self.warmup_epochs + t,
        };
        beta_at(&schedule, idx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Warmup,
    Main,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub phase: Phase,
    pub beta: Option<f64>,
    pub learning_rate: f64,
    pub shuffle_seed: u64,
    pub loss_racl: f64,
    pub loss_focal: f64,
    pub loss_combined: f64,
    /// Fraction of samples whose prediction already lay in its credal set.
    pub frac_inside: f64,
    pub train_accuracy: f64,
    pub val_accuracy: Option<f64>,
    pub alpha: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxSnapshot {
    pub after_epoch: usize,
    pub rates: ClassErrorRates,
    pub alpha: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub format_version: u32,
    pub loss: LossKind,
    pub model: ModelSpec,
    pub num_classes: usize,
    pub num_samples: usize,
    pub config: TrainConfig,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub header: LogHeader,
    pub epochs: Vec<EpochLog>,
    pub relaxation: Vec<RelaxSnapshot>,
    pub warmup_losses: Vec<WarmupLossRecord>,
}

impl TrainingLog {
    /// One row per epoch, preceded by a `#` line echoing the key settings.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        let c = &self.header.config;
        writeln!(
            out,
            "# loss={} beta0={} beta1={} warmup_epochs={} total_epochs={} lambda={} gamma={} seed={}",
            self.header.loss,
            c.beta0,
            c.beta1,
            c.warmup_epochs,
            c.total_epochs,
            c.focal.lambda_mix,
            c.focal.gamma,
            c.seed
        )?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "epoch",
            "phase",
            "beta",
            "learning_rate",
            "shuffle_seed",
            "loss_racl",
            "loss_focal",
            "loss_combined",
            "frac_inside",
            "train_accuracy",
            "val_accuracy",
        ])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for e in &self.epochs {
            w.write_record([
                e.epoch.to_string(),
                match e.phase {
                    Phase::Warmup => "warmup".into(),
                    Phase::Main => "main".into(),
                },
                opt(e.beta),
                e.learning_rate.to_string(),
                e.shuffle_seed.to_string(),
                e.loss_racl.to_string(),
                e.loss_focal.to_string(),
                e.loss_combined.to_string(),
                e.frac_inside.to_string(),
                e.train_accuracy.to_string(),
                opt(e.val_accuracy),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn main_epochs(&self) -> impl Iterator<Item = &EpochLog> {
        self.epochs.iter().filter(|e| e.phase == Phase::Main)
    }
}

/// SHA-256 over the JSON of everything that determines a run.
pub fn config_hash(cfg: &TrainConfig, spec: &ModelSpec, loss: LossKind) -> String {
    let payload = serde_json::json!({ "config": cfg, "model": spec, "loss": loss });
    let digest = Sha256::digest(payload.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Isotropic unit-variance Gaussian clusters.
///
/// In two dimensions the class means sit on a ring with neighbouring means
/// `separation` apart. In higher dimensions they are scaled basis vectors
/// (pairwise distance `separation`), falling back to the ring in the first
/// two coordinates when there are more classes than dimensions.
pub fn synth_blobs(
    num_classes: usize,
    n_per_class: usize,
    dim: usize,
    separation: f64,
    seed: u64,
) -> Result<Dataset> {
    if num_classes < 2 || dim < 2 {
        return Err(RaclError::InvalidConfig(format!(
            "blobs need at least 2 classes and 2 dimensions, got K={num_classes} dim={dim}"
        )));
    }
    if !(separation > 0.0 && separation.is_finite()) {
        return Err(RaclError::InvalidConfig(format!("separation {separation} must be positive")));
    }
    let means: Vec<Vec<f64>> = (0..num_classes)
        .map(|c| {
            let mut m = vec![0.0; dim];
            if dim > 2 && num_classes <= dim {
                m[c] = separation / std::f64::consts::SQRT_2;
            } else {
                let angle = 2.0 * std::f64::consts::PI * c as f64 / num_classes as f64;
                let radius = separation / (2.0 * (std::f64::consts::PI / num_classes as f64).sin());
                m[0] = radius * angle.cos();
                m[1] = radius * angle.sin();
            }
            m
        })
        .collect();
    let mut rng = seeded_stream(seed, STREAM_BLOBS);
    let mut samples = Vec::with_capacity(num_classes * n_per_class);
    for i in 0..n_per_class {
        for (c, mean) in means.iter().enumerate() {
            let features = mean
                .iter()
                .map(|m| m + <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                .collect();
            samples.push(Sample { id: (i * num_classes + c) as u64, features, label: c });
        }
    }
    Dataset::new(dim, samples)
}

fn epoch_seed(seed: u64, epoch: usize) -> u64 {
    // splitmix64 of (seed, epoch)
    let mut z = seed ^ (epoch as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn check_dataset(data: &Dataset, spec: &ModelSpec, num_classes: usize) -> Result<()> {
    spec.validate()?;
    if data.is_empty() {
        return Err(RaclError::InvalidInput("training set is empty".into()));
    }
    if data.feature_dim() != spec.input_dim {
        return Err(RaclError::DimensionMismatch { expected: spec.input_dim, actual: data.feature_dim() });
    }
    if data.inferred_num_classes() > num_classes {
        return Err(RaclError::InvalidConfig(format!(
            "labels exceed the configured {num_classes} classes"
        )));
    }
    Ok(())
}

/// Per-sample objective used inside an epoch.
enum Objective<'a> {
    CrossEntropy,
    Focal(f64),
    Credal { racl: &'a RaclConfig, focal: &'a FocalConfig },
}

struct EpochStats {
    racl: f64,
    focal: f64,
    combined: f64,
    frac_inside: f64,
}

#[allow(clippy::too_many_arguments)]
fn run_epoch(
    model: &mut Model,
    velocity: &mut crate::model::Gradients,
    data: &Dataset,
    objective: &Objective<'_>,
    lr: f64,
    momentum: f64,
    batch_size: usize,
    shuffle_seed: u64,
    epoch: usize,
) -> Result<EpochStats> {
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle_seed));
    let (mut racl_sum, mut focal_sum, mut comb_sum, mut inside) = (0.0, 0.0, 0.0, 0usize);
    for batch in order.chunks(batch_size) {
        let mut batch = batch.to_vec();
        batch.sort_unstable();
        let mut grads = model.zero_grads();
        let mut comb = Vec::with_capacity(batch.len());
        for &i in &batch {
            let s = &data.samples()[i];
            let trace = model.forward(&s.features);
            if trace.logits.iter().any(|v| !v.is_finite()) {
                return Err(RaclError::Divergence {
                    epoch,
                    detail: format!("non-finite logits for sample {}", s.id),
                });
            }
            let p = ProbDist::from_raw(softmax_slice(&trace.logits));
            let (g, r, f, c, ins) = match objective {
                Objective::CrossEntropy => {
                    let l = losses::cross_entropy(&p, s.label)?;
                    (losses::cross_entropy_grad_logits(&p, s.label)?, 0.0, l, l, false)
                }
                Objective::Focal(gamma) => {
                    let l = losses::focal_loss(&p, s.label, *gamma)?;
                    (losses::focal_grad_logits(&p, s.label, *gamma)?, 0.0, l, l, false)
                }
                Objective::Credal { racl, focal } => {
                    let out = losses::combined_grad_from_probs(&p, s.label, racl, focal)?;
                    let b = out.loss;
                    (out.grad, b.racl, b.focal, b.combined, b.inside_credal_set)
                }
            };
            model.backward(&s.features, &trace, &g, &mut grads);
            racl_sum += r;
            focal_sum += f;
            comb.push(c);
            inside += usize::from(ins);
        }
        comb_sum += comb.iter().sum::<f64>();
        grads.scale(1.0 / batch.len() as f64);
        if !grads.is_finite() || !losses::mean_in_order(&comb).is_finite() {
            return Err(RaclError::Divergence { epoch, detail: "non-finite loss or gradient".into() });
        }
        model.momentum_step(&grads, velocity, lr, momentum);
    }
    let n = data.len() as f64;
    Ok(EpochStats {
        racl: racl_sum / n,
        focal: focal_sum / n,
        combined: comb_sum / n,
        frac_inside: inside as f64 / n,
    })
}

/// Full forward pass: one cross-entropy record per sample.
pub fn loss_records(model: &Model, data: &Dataset) -> Result<Vec<WarmupLossRecord>> {
    data.samples()
        .iter()
        .map(|s| {
            let p = model.predict_proba(&s.features)?;
            Ok(WarmupLossRecord {
                sample_id: s.id,
                observed_class: s.label,
                ce_loss: losses::cross_entropy(&p, s.label)?,
            })
        })
        .collect()
}

fn accuracy(model: &Model, data: &Dataset) -> Result<f64> {
    let mut correct = 0usize;
    for s in data.samples() {
        if model.predict_proba(&s.features)?.argmax() == s.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len().max(1) as f64)
}

/// Initial model and the warm-up state of a run.
pub struct Warmup {
    pub model: Model,
    pub velocity: crate::model::Gradients,
    pub records: Vec<WarmupLossRecord>,
    pub epochs: Vec<EpochLog>,
}

/// Cross-entropy warm-up at the warm-up learning rate, then one full
/// forward pass for the per-sample loss records.
pub fn warmup(
    spec: &ModelSpec,
    data: &Dataset,
    num_classes: usize,
    cfg: &TrainConfig,
    val: Option<&Dataset>,
) -> Result<Warmup> {
    cfg.validate()?;
    check_dataset(data, spec, num_classes)?;
    let mut model = Model::init(*spec, num_classes, &mut seeded_stream(cfg.seed, STREAM_INIT))?;
    let mut velocity = model.zero_grads();
    let mut epochs = Vec::new();
    for epoch in 0..cfg.warmup_epochs {
        let shuffle_seed = epoch_seed(cfg.seed, epoch);
        let stats = run_epoch(
            &mut model,
            &mut velocity,
            data,
            &Objective::CrossEntropy,
            cfg.warmup_learning_rate,
            cfg.momentum,
            cfg.batch_size,
            shuffle_seed,
            epoch,
        )?;
        epochs.push(EpochLog {
            epoch,
            phase: Phase::Warmup,
            beta: None,
            learning_rate: cfg.warmup_learning_rate,
            shuffle_seed,
            loss_racl: stats.racl,
            loss_focal: stats.focal,
            loss_combined: stats.combined,
            frac_inside: stats.frac_inside,
            train_accuracy: accuracy(&model, data)?,
            val_accuracy: val.map(|v| accuracy(&model, v)).transpose()?,
            alpha: None,
        });
    }
    let records = loss_records(&model, data)?;
    Ok(Warmup { model, velocity, records, epochs })
}

fn relax_snapshot(
    records: &[WarmupLossRecord],
    space: &LabelSpace,
    cfg: &TrainConfig,
    after_epoch: usize,
) -> Result<RelaxSnapshot> {
    let tau = relax::compute_tau(records, cfg.tau_policy)?;
    let rates = relax::compute_error_rates(records, tau, space)?;
    let alpha = relax::compute_alpha(&rates, &cfg.alpha);
    Ok(RelaxSnapshot { after_epoch, rates, alpha })
}

fn fit(
    data: &Dataset,
    spec: &ModelSpec,
    num_classes: usize,
    cfg: &TrainConfig,
    loss: LossKind,
    val: Option<&Dataset>,
) -> Result<(Model, TrainingLog)> {
    let space = LabelSpace::with_classes(num_classes)?;
    let Warmup { mut model, mut velocity, records, mut epochs } =
        warmup(spec, data, num_classes, cfg, val)?;
    let mut relaxation = Vec::new();
    if loss == LossKind::Racl {
        relaxation.push(relax_snapshot(&records, &space, cfg, cfg.warmup_epochs)?);
    }

    for t in 0..cfg.main_epochs() {
        let epoch = cfg.warmup_epochs + t;
        let shuffle_seed = epoch_seed(cfg.seed, epoch);
        let beta = cfg.beta_for_main_epoch(t)?;
        if loss == LossKind::Racl && cfg.reestimate_alpha && t > 0 {
            let fresh = loss_records(&model, data)?;
            relaxation.push(relax_snapshot(&fresh, &space, cfg, epoch)?);
        }
        let alpha = relaxation.last().map(|s| s.alpha.clone());
        let racl_cfg = RaclConfig::new(beta, alpha.clone().unwrap_or_default(), cfg.alpha_selector)?;
        let objective = match loss {
            LossKind::Ce => Objective::CrossEntropy,
            LossKind::Focal => Objective::Focal(cfg.focal.gamma),
            LossKind::Racl => Objective::Credal { racl: &racl_cfg, focal: &cfg.focal },
        };
        let stats = run_epoch(
            &mut model,
            &mut velocity,
            data,
            &objective,
            cfg.learning_rate,
            cfg.momentum,
            cfg.batch_size,
            shuffle_seed,
            epoch,
        )?;
        epochs.push(EpochLog {
            epoch,
            phase: Phase::Main,
            beta: (loss == LossKind::Racl).then_some(beta),
            learning_rate: cfg.learning_rate,
            shuffle_seed,
            loss_racl: stats.racl,
            loss_focal: stats.focal,
            loss_combined: stats.combined,
            frac_inside: stats.frac_inside,
            train_accuracy: accuracy(&model, data)?,
            val_accuracy: val.map(|v| accuracy(&model, v)).transpose()?,
            alpha,
        });
    }

    let header = LogHeader {
        format_version: LOG_FORMAT_VERSION,
        loss,
        model: *spec,
        num_classes,
        num_samples: data.len(),
        config: cfg.clone(),
        config_hash: config_hash(cfg, spec, loss),
    };
    Ok((model, TrainingLog { header, epochs, relaxation, warmup_losses: records }))
}

/// Warm-up, relaxation estimation, then the scheduled credal/focal mixture.
pub fn fit_racl(
    data: &Dataset,
    spec: &ModelSpec,
    num_classes: usize,
    cfg: &TrainConfig,
    val: Option<&Dataset>,
) -> Result<(Model, TrainingLog)> {
    fit(data, spec, num_classes, cfg, LossKind::Racl, val)
}

/// Same phases with cross-entropy or focal loss throughout the main phase.
pub fn fit_baseline(
    data: &Dataset,
    spec: &ModelSpec,
    num_classes: usize,
    cfg: &TrainConfig,
    loss: LossKind,
    val: Option<&Dataset>,
) -> Result<(Model, TrainingLog)> {
    if loss == LossKind::Racl {
        return Err(RaclError::InvalidConfig("use fit_racl for the credal loss".into()));
    }
    fit(data, spec, num_classes, cfg, loss, val)
}

/// Class-probability scores for every sample.
pub fn predict_scores(model: &Model, data: &Dataset) -> Result<Vec<Vec<f64>>> {
    if data.feature_dim() != model.input_dim() {
        return Err(RaclError::DimensionMismatch { expected: model.input_dim(), actual: data.feature_dim() });
    }
    data.samples()
        .iter()
        .map(|s| model.predict_proba(&s.features).map(ProbDist::into_vec))
        .collect()
}

pub fn evaluate(model: &Model, data: &Dataset) -> Result<EvalResult> {
    if data.is_empty() {
        return Err(RaclError::InvalidInput("evaluation set is empty".into()));
    }
    if let Some(s) = data.samples().iter().find(|s| s.label >= model.num_classes()) {
        return Err(RaclError::IndexOutOfRange { index: s.label, num_classes: model.num_classes() });
    }
    let scores = predict_scores(model, data)?;
    metrics::evaluate_scores(&scores, &data.labels())
}

/// Metrics against clean labels plus accuracy on the flipped and untouched
/// subsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyEval {
    pub clean: EvalResult,
    pub flipped_accuracy: Option<f64>,
    pub clean_subset_accuracy: Option<f64>,
    pub num_flipped: usize,
}

pub fn evaluate_with_audit(model: &Model, data: &Dataset, flipped: &[bool]) -> Result<NoisyEval> {
    if flipped.len() != data.len() {
        return Err(RaclError::DimensionMismatch { expected: data.len(), actual: flipped.len() });
    }
    let clean = evaluate(model, data)?;
    let scores = predict_scores(model, data)?;
    let subset_acc = |want: bool| {
        let (mut hit, mut n) = (0usize, 0usize);
        for ((row, s), &f) in scores.iter().zip(data.samples()).zip(flipped) {
            if f == want {
                n += 1;
                hit += usize::from(crate::prob::argmax(row) == s.label);
            }
        }
        (n > 0).then(|| hit as f64 / n as f64)
    };
    Ok(NoisyEval {
        clean,
        flipped_accuracy: subset_acc(true),
        clean_subset_accuracy: subset_acc(false),
        num_flipped: flipped.iter().filter(|f| **f).count(),
    })
}

pub fn evaluate_noisy(model: &Model, noisy: &NoisyDataset) -> Result<NoisyEval> {
    let flipped: Vec<bool> = noisy.samples().iter().map(|s| s.flipped).collect();
    evaluate_with_audit(model, &noisy.clean(), &flipped)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blobs_are_seeded_and_balanced() {
        let a = synth_blobs(3, 20, 2, 4.0, 5).unwrap();
        assert_eq!(a, synth_blobs(3, 20, 2, 4.0, 5).unwrap());
        assert_ne!(a, synth_blobs(3, 20, 2, 4.0, 6).unwrap());
        assert_eq!(a.class_counts(3), vec![20, 20, 20]);
        assert!(synth_blobs(1, 20, 2, 4.0, 5).is_err());
        assert!(synth_blobs(3, 20, 1, 4.0, 5).is_err());
        assert!(synth_blobs(3, 20, 2, 0.0, 5).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig { warmup_epochs: 30, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = TrainConfig { beta0: 0.5, beta1: 0.6, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = TrainConfig { batch_size: 0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn schedule_endpoints_fall_on_main_phase() {
        let cfg = TrainConfig::default();
        assert_eq!(cfg.beta_for_main_epoch(0).unwrap(), 0.75);
        assert!((cfg.beta_for_main_epoch(24).unwrap() - 0.55).abs() < 1e-15);
        let all = TrainConfig { schedule_indexing: ScheduleIndexing::AllEpochs, ..cfg };
        assert!(all.beta_for_main_epoch(0).unwrap() < 0.75);
        assert!((all.beta_for_main_epoch(24).unwrap() - 0.55).abs() < 1e-15);
    }

    #[test]
    fn epoch_seeds_differ() {
        assert_ne!(epoch_seed(1, 0), epoch_seed(1, 1));
        assert_ne!(epoch_seed(1, 0), epoch_seed(2, 0));
    }

    #[test]
    fn evaluate_rejects_empty_and_mismatch() {
        let m = Model::init(ModelSpec::linear(2), 2, &mut seeded_stream(0, 0)).unwrap();
        let empty = Dataset::new(2, vec![]).unwrap();
        assert!(evaluate(&m, &empty).is_err());
        let d3 = synth_blobs(2, 5, 3, 1.0, 0).unwrap();
        assert!(matches!(evaluate(&m, &d3), Err(RaclError::DimensionMismatch { .. })));
    }

    #[test]
    fn zero_warmup_uses_initial_model() {
        let data = synth_blobs(2, 10, 2, 3.0, 1).unwrap();
        let cfg = TrainConfig { warmup_epochs: 0, total_epochs: 2, ..Default::default() };
        let w = warmup(&ModelSpec::linear(2), &data, 2, &cfg, None).unwrap();
        let init = Model::init(ModelSpec::linear(2), 2, &mut seeded_stream(cfg.seed, STREAM_INIT)).unwrap();
        assert_eq!(w.model, init);
        assert_eq!(w.records, loss_records(&init, &data).unwrap());
        assert!(w.epochs.is_empty());
    }
}
