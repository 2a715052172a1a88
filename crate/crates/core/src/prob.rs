//! Probability-simplex primitives: label spaces, distributions, logits,
//! softmax and KL divergence.
//!
//! All logarithms are natural, so every loss in the crate is in nats.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, check_index, RaclError, Result};

/// Tolerance on the simplex sum accepted at construction.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Floor applied to the second argument of [`kl_divergence`] and inside the
/// log of cross-entropy style losses.
pub const PROB_FLOOR: f64 = 1e-12;

/// The finite label set, with display names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSpace {
    class_names: Vec<String>,
}

impl LabelSpace {
    pub fn new(class_names: Vec<String>) -> Result<Self> {
        if class_names.len() < 2 {
            return Err(RaclError::InvalidInput(format!(
                "label space needs at least 2 classes, got {}",
                class_names.len()
            )));
        }
        let unique: HashSet<&str> = class_names.iter().map(String::as_str).collect();
        if unique.len() != class_names.len() {
            return Err(RaclError::InvalidInput("class names must be unique".into()));
        }
        Ok(Self { class_names })
    }

    /// Label space with names `"0"`, `"1"`, ...
    pub fn with_classes(num_classes: usize) -> Result<Self> {
        Self::new((0..num_classes).map(|c| c.to_string()).collect())
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }
}

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbDist(Vec<f64>);

impl ProbDist {
    /// Validates and, when the sum is within [`SIMPLEX_TOL`] of one,
    /// renormalizes. Negative or non-finite entries are rejected.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(RaclError::InvalidInput("empty distribution".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(RaclError::InvalidInput(format!(
                "probability {v} is negative or non-finite"
            )));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(RaclError::InvalidInput(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(Self(values.into_iter().map(|v| v / sum).collect()))
    }

    /// Builds from values already known to be on the simplex.
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        debug_assert!((values.iter().sum::<f64>() - 1.0).abs() <= 1e-6);
        Self(values)
    }

    pub fn uniform(num_classes: usize) -> Self {
        Self(vec![1.0 / num_classes as f64; num_classes])
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

    pub fn get(&self, index: usize) -> f64 {
        self.0[index]
    }

    /// Index of the largest probability; the lowest index wins ties.
    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Unnormalized model scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Logits(Vec<f64>);

impl Logits {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(RaclError::InvalidInput("empty logits".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(RaclError::InvalidInput("logits must be finite".into()));
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
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Max-shifted softmax.
pub fn softmax(z: &Logits) -> ProbDist {
    ProbDist(softmax_slice(z.values()))
}

/// Softmax over a raw slice; callers guarantee finiteness.
pub(crate) fn softmax_slice(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// One-hot distribution at `y`.
pub fn degenerate(y: usize, space: &LabelSpace) -> Result<ProbDist> {
    let k = space.num_classes();
    check_index(y, k)?;
    let mut v = vec![0.0; k];
    v[y] = 1.0;
    Ok(ProbDist(v))
}

/// KL(p ‖ q) in nats, with `0·log(0/·) = 0` and `q` floored at
/// [`PROB_FLOOR`].
pub fn kl_divergence(p: &ProbDist, q: &ProbDist) -> Result<f64> {
    check_dims(p.len(), q.len())?;
    Ok(kl_slices(p.values(), q.values()))
}

pub(crate) fn kl_slices(p: &[f64], q: &[f64]) -> f64 {
    let kl: f64 = p
        .iter()
        .zip(q)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, qi)| pi * (pi / qi.max(PROB_FLOOR)).ln())
        .sum();
    // Rounding can leave tiny negatives when p == q.
    kl.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn softmax_examples() {
        let s = softmax(&Logits::new(vec![0.0, 0.0, 0.0]).unwrap());
        assert!(close(s.values(), &[1.0 / 3.0; 3], 1e-15));

        let s = softmax(&Logits::new(vec![1000.0, 0.0]).unwrap());
        assert!(close(s.values(), &[1.0, 0.0], 1e-12));

        let s = softmax(&Logits::new(vec![std::f64::consts::LN_2, 0.0]).unwrap());
        assert!(close(s.values(), &[2.0 / 3.0, 1.0 / 3.0], 1e-12));
    }

    #[test]
    fn logits_reject_non_finite() {
        assert!(Logits::new(vec![0.0, f64::NAN]).is_err());
        assert!(Logits::new(vec![f64::INFINITY, 0.0]).is_err());
    }

    #[test]
    fn degenerate_examples() {
        let space = LabelSpace::with_classes(3).unwrap();
        assert_eq!(degenerate(0, &space).unwrap().values(), &[1.0, 0.0, 0.0]);
        assert_eq!(degenerate(2, &space).unwrap().values(), &[0.0, 0.0, 1.0]);
        assert!(matches!(
            degenerate(3, &space),
            Err(RaclError::IndexOutOfRange { index: 3, num_classes: 3 })
        ));
    }

    #[test]
    fn kl_examples() {
        let p = ProbDist::new(vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);

        let a = ProbDist::new(vec![1.0, 0.0]).unwrap();
        let b = ProbDist::new(vec![0.5, 0.5]).unwrap();
        assert!((kl_divergence(&a, &b).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);

        let a = ProbDist::new(vec![0.7, 0.3]).unwrap();
        let b = ProbDist::new(vec![0.3, 0.7]).unwrap();
        assert!((kl_divergence(&a, &b).unwrap() - 0.338_919_144_154_881_45).abs() < 1e-12);

        let c = ProbDist::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert!(matches!(
            kl_divergence(&a, &c),
            Err(RaclError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn kl_floor_keeps_value_finite() {
        let p = ProbDist::new(vec![0.5, 0.5]).unwrap();
        let q = ProbDist::new(vec![1.0, 0.0]).unwrap();
        let kl = kl_divergence(&p, &q).unwrap();
        assert!(kl.is_finite());
        assert!((kl - (0.5 * 0.5f64.ln() + 0.5 * (0.5 / PROB_FLOOR).ln())).abs() < 1e-9);
    }

    #[test]
    fn prob_dist_tolerance() {
        let p = ProbDist::new(vec![0.5, 0.5 + 5e-10]).unwrap();
        assert!((p.values().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(ProbDist::new(vec![0.5, 0.5 + 1e-6]).is_err());
        assert!(ProbDist::new(vec![1.1, -0.1]).is_err());
    }

    #[test]
    fn label_space_invariants() {
        assert!(LabelSpace::with_classes(1).is_err());
        assert!(LabelSpace::new(vec!["a".into(), "a".into()]).is_err());
        assert_eq!(LabelSpace::with_classes(4).unwrap().num_classes(), 4);
    }

    fn simplex_point(k: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, k).prop_filter_map("nonzero mass", |v| {
            let s: f64 = v.iter().sum();
            (s > 1e-6).then(|| v.iter().map(|x| x / s).collect())
        })
    }

    proptest! {
        #[test]
        fn kl_nonnegative_and_zero_iff_equal(
            (p, q) in (2usize..8).prop_flat_map(|k| (simplex_point(k), simplex_point(k)))
        ) {
            let p = ProbDist::new(p).unwrap();
            let q = ProbDist::new(q).unwrap();
            let kl = kl_divergence(&p, &q).unwrap();
            prop_assert!(kl >= 0.0);
            prop_assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
            let max_diff = p.values().iter().zip(q.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if max_diff > 1e-9 {
                prop_assert!(kl > 0.0);
            }
        }

        #[test]
        fn softmax_stays_on_simplex(z in prop::collection::vec(-1e4f64..1e4, 2..10)) {
            let p = softmax(&Logits::new(z).unwrap());
            prop_assert!(p.values().iter().all(|v| *v >= 0.0));
            prop_assert!((p.values().iter().sum::<f64>() - 1.0).abs() <= SIMPLEX_TOL);
        }

        #[test]
        fn softmax_shift_invariant(z in prop::collection::vec(-50.0f64..50.0, 2..10), c in -100.0f64..100.0) {
            let a = softmax(&Logits::new(z.clone()).unwrap());
            let b = softmax(&Logits::new(z.iter().map(|v| v + c).collect()).unwrap());
            prop_assert!(close(a.values(), b.values(), 1e-12));
        }
    }
}
