//! Possibility distributions, the β threshold schedule, membership in the
//! credal set they induce, and projection onto its boundary.
//!
//! A possibility distribution `π` induces the credal set
//! `Q_π = { p : Σ_{y∈Y} p(y) ≤ max_{y∈Y} π(y) for every Y ⊆ 𝒴 }`.
//! Membership is checked in `O(K log K)` by testing only the level sets of
//! `π`: for each distinct level `v`, the heaviest subset whose maximum is
//! `v` is `{y : π(y) ≤ v}`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, check_index, RaclError, Result};
use crate::prob::ProbDist;

/// Slack on every level-set inequality, so boundary points are members.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Largest label space accepted by [`contains_bruteforce`].
pub const BRUTEFORCE_MAX_CLASSES: usize = 16;

/// Per-class upper bounds on the true label probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PossibilityDist(Vec<f64>);

impl PossibilityDist {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(RaclError::InvalidInput("empty possibility distribution".into()));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(RaclError::InvalidInput(
                "possibility values must lie in [0, 1]".into(),
            ));
        }
        if !values.contains(&1.0) {
            return Err(RaclError::InvalidInput(
                "possibility distribution needs at least one fully plausible class".into(),
            ));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when every value is either 1 or `alpha`.
    pub fn is_two_level(&self, alpha: f64) -> bool {
        self.0.iter().all(|v| *v == 1.0 || *v == alpha)
    }

    /// Indicator of the fully plausible classes.
    pub fn plausible_mask(&self) -> Vec<bool> {
        self.0.iter().map(|v| *v == 1.0).collect()
    }
}

/// Cosine decay of the confidence threshold from `beta0` to `beta1` over
/// `t_max` epochs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaSchedule {
    beta0: f64,
    beta1: f64,
    t_max: usize,
}

impl BetaSchedule {
    pub fn new(beta0: f64, beta1: f64, t_max: usize) -> Result<Self> {
        for (name, b) in [("beta0", beta0), ("beta1", beta1)] {
            if !(0.0..=1.0).contains(&b) {
                return Err(RaclError::InvalidConfig(format!("{name}={b} outside [0, 1]")));
            }
        }
        if beta0 < beta1 {
            return Err(RaclError::InvalidConfig(format!(
                "beta schedule must decay: beta0={beta0} < beta1={beta1}"
            )));
        }
        if t_max == 0 {
            return Err(RaclError::InvalidConfig("t_max must be positive".into()));
        }
        Ok(Self { beta0, beta1, t_max })
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    pub fn with_t_max(self, t_max: usize) -> Result<Self> {
        Self::new(self.beta0, self.beta1, t_max)
    }
}

/// β at epoch `t`: `β₁ + ½(β₀ − β₁)(1 + cos(π t / T_max))`.
pub fn beta_at(schedule: &BetaSchedule, t: usize) -> Result<f64> {
    if t > schedule.t_max {
        return Err(RaclError::InvalidInput(format!(
            "epoch {t} beyond t_max={}",
            schedule.t_max
        )));
    }
    if t == 0 {
        return Ok(schedule.beta0);
    }
    let phase = std::f64::consts::PI * t as f64 / schedule.t_max as f64;
    Ok(schedule.beta1 + 0.5 * (schedule.beta0 - schedule.beta1) * (1.0 + phase.cos()))
}

/// π(y) = 1 for the observed label and for every class with p̂(y) ≥ β,
/// `alpha` elsewhere.
pub fn elicit_possibility(
    y_obs: usize,
    p_hat: &ProbDist,
    beta: f64,
    alpha: f64,
) -> Result<PossibilityDist> {
    check_index(y_obs, p_hat.len())?;
    if !(0.0..=1.0).contains(&beta) {
        return Err(RaclError::InvalidInput(format!("beta={beta} outside [0, 1]")));
    }
    check_alpha(alpha)?;
    let values = p_hat
        .values()
        .iter()
        .enumerate()
        .map(|(y, &p)| if y == y_obs || p >= beta { 1.0 } else { alpha })
        .collect();
    Ok(PossibilityDist(values))
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(RaclError::InvalidInput(format!("alpha={alpha} outside [0, 1)")));
    }
    Ok(())
}

/// The credal set `Q_π` induced by a possibility distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct CredalSet {
    generator: PossibilityDist,
}

impl CredalSet {
    pub fn new(generator: PossibilityDist) -> Self {
        Self { generator }
    }

    pub fn generator(&self) -> &PossibilityDist {
        &self.generator
    }

    pub fn contains(&self, p: &ProbDist) -> Result<bool> {
        contains(self, p)
    }
}

/// Level-set membership test.
pub fn contains(set: &CredalSet, p: &ProbDist) -> Result<bool> {
    let pi = set.generator.values();
    check_dims(pi.len(), p.len())?;
    let mut order: Vec<usize> = (0..pi.len()).collect();
    order.sort_by(|&a, &b| pi[a].total_cmp(&pi[b]));
    // Sweep levels in ascending order, accumulating mass of every class at or
    // below the current level.
    let mut mass = 0.0;
    let mut i = 0;
    while i < order.len() {
        let level = pi[order[i]];
        while i < order.len() && pi[order[i]] == level {
            mass += p.get(order[i]);
            i += 1;
        }
        if mass > level + MEMBERSHIP_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exhaustive membership test over all `2^K − 1` nonempty subsets.
pub fn contains_bruteforce(set: &CredalSet, p: &ProbDist) -> Result<bool> {
    let pi = set.generator.values();
    check_dims(pi.len(), p.len())?;
    let k = pi.len();
    if k > BRUTEFORCE_MAX_CLASSES {
        return Err(RaclError::UnsupportedSize(format!(
            "exhaustive membership supports at most {BRUTEFORCE_MAX_CLASSES} classes, got {k}"
        )));
    }
    for subset in 1u32..(1u32 << k) {
        let mut mass = 0.0;
        let mut bound = f64::NEG_INFINITY;
        for y in (0..k).filter(|y| subset & (1 << y) != 0) {
            mass += p.get(y);
            bound = bound.max(pi[y]);
        }
        if mass > bound + MEMBERSHIP_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Membership for a two-level π with levels {1, α}: the only binding
/// constraint is the total mass on the α-level classes.
pub fn contains_two_level(pi: &PossibilityDist, p: &ProbDist, alpha: f64) -> Result<bool> {
    check_dims(pi.len(), p.len())?;
    if !pi.is_two_level(alpha) {
        return Err(RaclError::InvalidInput("possibility distribution is not two-level".into()));
    }
    Ok(relaxed_mass(pi, p) <= alpha + MEMBERSHIP_TOL)
}

/// Σ p(y) over the classes with π(y) < 1.
pub(crate) fn relaxed_mass(pi: &PossibilityDist, p: &ProbDist) -> f64 {
    pi.values()
        .iter()
        .zip(p.values())
        .filter(|(v, _)| **v != 1.0)
        .map(|(_, q)| q)
        .sum()
}

/// Projects `p_hat` onto the boundary of `Q_π` for a two-level π: mass
/// `1 − α` is spread over the plausible classes and `α` over the rest, each
/// side proportionally to `p_hat`.
///
/// A side carrying no `p_hat` mass receives its share uniformly. When every
/// class is plausible, `p_hat` is returned unchanged.
pub fn project(p_hat: &ProbDist, pi: &PossibilityDist, alpha: f64) -> Result<ProbDist> {
    check_dims(pi.len(), p_hat.len())?;
    check_alpha(alpha)?;
    if !pi.is_two_level(alpha) {
        return Err(RaclError::InvalidInput("possibility distribution is not two-level".into()));
    }
    let plausible = pi.plausible_mask();
    let n_relaxed = plausible.iter().filter(|m| !**m).count();
    if n_relaxed == 0 {
        return Ok(p_hat.clone());
    }
    let n_plausible = plausible.len() - n_relaxed;

    let (mut mass_plausible, mut mass_relaxed) = (0.0, 0.0);
    for (&m, &q) in plausible.iter().zip(p_hat.values()) {
        if m {
            mass_plausible += q;
        } else {
            mass_relaxed += q;
        }
    }

    let share = |side_total: f64, side_mass: f64, side_count: usize, q: f64| {
        if side_mass > 0.0 {
            side_total * q / side_mass
        } else {
            side_total / side_count as f64
        }
    };
    let values = plausible
        .iter()
        .zip(p_hat.values())
        .map(|(&m, &q)| {
            if m {
                share(1.0 - alpha, mass_plausible, n_plausible, q)
            } else {
                share(alpha, mass_relaxed, n_relaxed, q)
            }
        })
        .collect();
    Ok(ProbDist::from_raw(values))
}
