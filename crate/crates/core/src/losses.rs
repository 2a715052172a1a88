//! Cross-entropy, focal loss, the credal relaxation loss and their mixture.
//!
//! The credal loss builds a two-level possibility distribution from the
//! observed label and the current prediction, returns zero when the
//! prediction already lies in the induced credal set, and otherwise returns
//! `KL(p^r ‖ p̂)` where `p^r` is the boundary projection of `p̂`.
//!
//! Because `p^r` rescales `p̂` separately on the plausible set `A` and the
//! relaxed set `B`, the divergence collapses to the binary form
//! `KL((1 − α, α) ‖ (S_A, 1 − S_A))` with `S_A = Σ_{y∈A} p̂(y)`. The gradient
//! uses that form.

use serde::{Deserialize, Serialize};

use crate::credal::{self, PossibilityDist};
use crate::error::{check_dims, check_index, RaclError, Result};
use crate::prob::{self, Logits, ProbDist, PROB_FLOOR};

/// Distance to the β threshold or the membership boundary below which a
/// gradient is reported as threshold-unstable.
pub const STABILITY_MARGIN: f64 = 1e-6;

/// Which class's α(c) relaxes an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaSelector {
    /// α of the instance's observed training label.
    #[default]
    ObservedLabel,
    /// α of the model's top candidate, the argmax of p̂.
    CandidateLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaclConfig {
    pub beta: f64,
    pub alpha_per_class: Vec<f64>,
    #[serde(default)]
    pub alpha_selector: AlphaSelector,
}

impl RaclConfig {
    pub fn new(beta: f64, alpha_per_class: Vec<f64>, alpha_selector: AlphaSelector) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(RaclError::InvalidConfig(format!("beta={beta} outside [0, 1]")));
        }
        for &a in &alpha_per_class {
            credal::check_alpha(a).map_err(|e| RaclError::InvalidConfig(e.to_string()))?;
        }
        Ok(Self { beta, alpha_per_class, alpha_selector })
    }

    fn alpha_for(&self, y_obs: usize, p_hat: &ProbDist) -> Result<f64> {
        check_dims(self.alpha_per_class.len(), p_hat.len())?;
        let c = match self.alpha_selector {
            AlphaSelector::ObservedLabel => y_obs,
            AlphaSelector::CandidateLabel => p_hat.argmax(),
        };
        Ok(self.alpha_per_class[c])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FocalConfig {
    pub gamma: f64,
    /// Weight λ of the credal loss; the focal term gets `1 − λ`.
    pub lambda_mix: f64,
}

impl Default for FocalConfig {
    fn default() -> Self {
        Self { gamma: 2.0, lambda_mix: 0.5 }
    }
}

impl FocalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(RaclError::InvalidConfig(format!("gamma={} must be >= 0", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.lambda_mix) {
            return Err(RaclError::InvalidConfig(format!(
                "lambda_mix={} outside [0, 1]",
                self.lambda_mix
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossBreakdown {
    pub racl: f64,
    pub focal: f64,
    pub combined: f64,
    pub inside_credal_set: bool,
}

/// Result of [`racl_loss`].
#[derive(Debug, Clone, PartialEq)]
pub struct RaclOutcome {
    pub loss: f64,
    pub pi: PossibilityDist,
    pub inside: bool,
    pub alpha: f64,
}

/// Loss value and gradient with respect to the logits.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitGrad {
    pub loss: LossBreakdown,
    pub grad: Vec<f64>,
    /// False when p̂ sits within [`STABILITY_MARGIN`] of a threshold that
    /// switches π or the membership branch.
    pub threshold_stable: bool,
}

pub fn cross_entropy(p_hat: &ProbDist, y_obs: usize) -> Result<f64> {
    check_index(y_obs, p_hat.len())?;
    Ok(0.0 - p_hat.get(y_obs).max(PROB_FLOOR).ln())
}

/// `−(1 − p̂_y)^γ · log p̂_y`.
pub fn focal_loss(p_hat: &ProbDist, y_obs: usize, gamma: f64) -> Result<f64> {
    let ce = cross_entropy(p_hat, y_obs)?;
    Ok((1.0 - p_hat.get(y_obs)).max(0.0).powf(gamma) * ce)
}

pub fn racl_loss(p_hat: &ProbDist, y_obs: usize, cfg: &RaclConfig) -> Result<RaclOutcome> {
    check_index(y_obs, p_hat.len())?;
    let alpha = cfg.alpha_for(y_obs, p_hat)?;
    let pi = credal::elicit_possibility(y_obs, p_hat, cfg.beta, alpha)?;
    let inside = credal::contains_two_level(&pi, p_hat, alpha)?;
    let loss = if inside {
        0.0
    } else {
        let target = credal::project(p_hat, &pi, alpha)?;
        prob::kl_divergence(&target, p_hat)?
    };
    Ok(RaclOutcome { loss, pi, inside, alpha })
}

pub fn combined_loss(
    p_hat: &ProbDist,
    y_obs: usize,
    racl_cfg: &RaclConfig,
    focal_cfg: &FocalConfig,
) -> Result<LossBreakdown> {
    let racl = racl_loss(p_hat, y_obs, racl_cfg)?;
    let focal = focal_loss(p_hat, y_obs, focal_cfg.gamma)?;
    Ok(mix(racl.loss, focal, racl.inside, focal_cfg.lambda_mix))
}

fn mix(racl: f64, focal: f64, inside: bool, lambda: f64) -> LossBreakdown {
    LossBreakdown {
        racl,
        focal,
        combined: lambda * racl + (1.0 - lambda) * focal,
        inside_credal_set: inside,
    }
}

/// `∂ CE / ∂z = p̂ − onehot(y)`.
pub fn cross_entropy_grad_logits(p_hat: &ProbDist, y_obs: usize) -> Result<Vec<f64>> {
    check_index(y_obs, p_hat.len())?;
    Ok(p_hat
        .values()
        .iter()
        .enumerate()
        .map(|(j, &p)| if j == y_obs { p - 1.0 } else { p })
        .collect())
}

/// `∂ FL / ∂z_j = [(1 − p)^γ − γ p (1 − p)^{γ−1} log p] (p_j − δ_{jy})`.
///
/// With `γ = 0` the scale is exactly 1, so the result is bitwise the
/// cross-entropy gradient.
pub fn focal_grad_logits(p_hat: &ProbDist, y_obs: usize, gamma: f64) -> Result<Vec<f64>> {
    let mut g = cross_entropy_grad_logits(p_hat, y_obs)?;
    if gamma == 0.0 {
        return Ok(g);
    }
    let p = p_hat.get(y_obs);
    let q = 1.0 - p;
    let scale = if q <= 0.0 {
        0.0
    } else {
        q.powf(gamma) - gamma * p * q.powf(gamma - 1.0) * p.max(PROB_FLOOR).ln()
    };
    for v in &mut g {
        *v *= scale;
    }
    Ok(g)
}

/// Gradient of the credal loss composed with softmax.
///
/// π's threshold pattern and the membership branch are piecewise constant
/// in p̂ and treated as fixed; the gradient flows through `p^r`.
pub fn racl_grad_logits(z: &Logits, y_obs: usize, cfg: &RaclConfig) -> Result<LogitGrad> {
    let p_hat = prob::softmax(z);
    let outcome = racl_loss(&p_hat, y_obs, cfg)?;
    let grad = racl_grad_from_outcome(&p_hat, &outcome);
    let threshold_stable = is_threshold_stable(&p_hat, &outcome, cfg);
    Ok(LogitGrad {
        loss: mix(outcome.loss, 0.0, outcome.inside, 1.0),
        grad,
        threshold_stable,
    })
}

fn racl_grad_from_outcome(p_hat: &ProbDist, outcome: &RaclOutcome) -> Vec<f64> {
    let k = p_hat.len();
    if outcome.inside {
        return vec![0.0; k];
    }
    let plausible = outcome.pi.plausible_mask();
    let alpha = outcome.alpha;
    let s_a: f64 = plausible
        .iter()
        .zip(p_hat.values())
        .filter(|(m, _)| **m)
        .map(|(_, p)| p)
        .sum();
    let s_b = 1.0 - s_a;
    let mut d_loss_d_sa = -(1.0 - alpha) / s_a.max(PROB_FLOOR);
    if alpha > 0.0 {
        d_loss_d_sa += alpha / s_b.max(PROB_FLOOR);
    }
    // ∂S_A/∂z_j = p_j (1[j ∈ A] − S_A)
    plausible
        .iter()
        .zip(p_hat.values())
        .map(|(&m, &p)| d_loss_d_sa * p * (if m { 1.0 } else { 0.0 } - s_a))
        .collect()
}

fn is_threshold_stable(p_hat: &ProbDist, outcome: &RaclOutcome, cfg: &RaclConfig) -> bool {
    let near_beta = p_hat
        .values()
        .iter()
        .any(|p| (p - cfg.beta).abs() <= STABILITY_MARGIN);
    let s_b = credal::relaxed_mass(&outcome.pi, p_hat);
    let near_boundary = (s_b - outcome.alpha).abs() <= STABILITY_MARGIN;
    let argmax_tie = cfg.alpha_selector == AlphaSelector::CandidateLabel && {
        let top = p_hat.argmax();
        p_hat
            .values()
            .iter()
            .enumerate()
            .any(|(j, p)| j != top && (p_hat.get(top) - p).abs() <= STABILITY_MARGIN)
    };
    !(near_beta || near_boundary || argmax_tie)
}

/// Combined loss and its gradient with respect to the logits:
/// `λ · ∇racl + (1 − λ) · ∇focal`.
pub fn combined_grad_logits(
    z: &Logits,
    y_obs: usize,
    racl_cfg: &RaclConfig,
    focal_cfg: &FocalConfig,
) -> Result<LogitGrad> {
    let p_hat = prob::softmax(z);
    combined_grad_from_probs(&p_hat, y_obs, racl_cfg, focal_cfg)
}

pub(crate) fn combined_grad_from_probs(
    p_hat: &ProbDist,
    y_obs: usize,
    racl_cfg: &RaclConfig,
    focal_cfg: &FocalConfig,
) -> Result<LogitGrad> {
    let lambda = focal_cfg.lambda_mix;
    let outcome = racl_loss(p_hat, y_obs, racl_cfg)?;
    let focal = focal_loss(p_hat, y_obs, focal_cfg.gamma)?;
    let g_racl = racl_grad_from_outcome(p_hat, &outcome);
    let g_focal = focal_grad_logits(p_hat, y_obs, focal_cfg.gamma)?;
    let grad = g_racl
        .iter()
        .zip(&g_focal)
        .map(|(r, f)| lambda * r + (1.0 - lambda) * f)
        .collect();
    Ok(LogitGrad {
        loss: mix(outcome.loss, focal, outcome.inside, lambda),
        grad,
        threshold_stable: is_threshold_stable(p_hat, &outcome, racl_cfg),
    })
}

/// Arithmetic mean summed in slice order. Callers pass per-sample values in
/// ascending sample index so batch reductions are reproducible.
pub fn mean_in_order(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sum = 0.0;
    for v in values {
        sum += v;
    }
    sum / values.len() as f64
}
