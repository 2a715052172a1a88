//! Warm-up loss bookkeeping, per-class error rates and the adaptive
//! relaxation levels α(c).
//!
//! After the warm-up phase every training sample carries one cross-entropy
//! loss. A class's error rate is the fraction of its samples whose loss
//! exceeds a threshold τ, and its relaxation is `α(c) = k / (e(c) + ε)`,
//! clamped to `alpha_max`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{check_index, RaclError, Result};
use crate::prob::LabelSpace;

/// One sample's cross-entropy loss at the end of warm-up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarmupLossRecord {
    pub sample_id: u64,
    pub observed_class: usize,
    pub ce_loss: f64,
}

/// Rule for choosing τ from the warm-up losses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TauPolicy {
    #[default]
    Mean,
    Quantile { q: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassErrorRates {
    pub e: Vec<f64>,
    pub tau: f64,
    pub sample_counts: Vec<usize>,
    /// Classes with no records; their rate is reported as 0.
    pub empty_classes: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlphaParams {
    pub k: f64,
    pub epsilon: f64,
    pub alpha_max: f64,
}

impl Default for AlphaParams {
    fn default() -> Self {
        Self { k: 0.05, epsilon: 0.01, alpha_max: 0.9 }
    }
}

impl AlphaParams {
    pub fn new(k: f64, epsilon: f64, alpha_max: f64) -> Result<Self> {
        let params = Self { k, epsilon, alpha_max };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(RaclError::InvalidConfig(format!("k={} must be positive", self.k)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(RaclError::InvalidConfig(format!(
                "epsilon={} must be positive",
                self.epsilon
            )));
        }
        if !(self.alpha_max > 0.0 && self.alpha_max < 1.0) {
            return Err(RaclError::InvalidConfig(format!(
                "alpha_max={} must lie in (0, 1)",
                self.alpha_max
            )));
        }
        Ok(())
    }
}

pub fn compute_tau(records: &[WarmupLossRecord], policy: TauPolicy) -> Result<f64> {
    if records.is_empty() {
        return Err(RaclError::InvalidInput("no warm-up loss records".into()));
    }
    match policy {
        TauPolicy::Mean => {
            Ok(records.iter().map(|r| r.ce_loss).sum::<f64>() / records.len() as f64)
        }
        TauPolicy::Quantile { q } => {
            if !(0.0..=1.0).contains(&q) {
                return Err(RaclError::InvalidConfig(format!("quantile q={q} outside [0, 1]")));
            }
            let mut losses: Vec<f64> = records.iter().map(|r| r.ce_loss).collect();
            losses.sort_by(f64::total_cmp);
            let pos = q * (losses.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            Ok(losses[lo] + (pos - lo as f64) * (losses[hi] - losses[lo]))
        }
    }
}

/// Fraction of each class's records with loss strictly above `tau`,
/// grouping by observed label.
pub fn compute_error_rates(
    records: &[WarmupLossRecord],
    tau: f64,
    space: &LabelSpace,
) -> Result<ClassErrorRates> {
    let k = space.num_classes();
    let mut counts = vec![0usize; k];
    let mut above = vec![0usize; k];
    for r in records {
        check_index(r.observed_class, k)?;
        if !(r.ce_loss.is_finite() && r.ce_loss >= 0.0) {
            return Err(RaclError::InvalidInput(format!(
                "sample {} has invalid loss {}",
                r.sample_id, r.ce_loss
            )));
        }
        counts[r.observed_class] += 1;
        if r.ce_loss > tau {
            above[r.observed_class] += 1;
        }
    }
    let e = counts
        .iter()
        .zip(&above)
        .map(|(&n, &a)| if n == 0 { 0.0 } else { a as f64 / n as f64 })
        .collect();
    let empty_classes = (0..k).filter(|&c| counts[c] == 0).collect();
    Ok(ClassErrorRates { e, tau, sample_counts: counts, empty_classes })
}

/// `α(c) = min(k / (e(c) + ε), alpha_max)`.
pub fn compute_alpha(rates: &ClassErrorRates, params: &AlphaParams) -> Vec<f64> {
    rates
        .e
        .iter()
        .map(|e| (params.k / (e + params.epsilon)).min(params.alpha_max))
        .collect()
}

/// Writes records as CSV with header `sample_id,observed_class,ce_loss`.
pub fn write_records_csv<W: Write>(records: &[WarmupLossRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<WarmupLossRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    rdr.deserialize()
        .map(|r| r.map_err(RaclError::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records(class: usize, losses: &[f64]) -> Vec<WarmupLossRecord> {
        losses
            .iter()
            .enumerate()
            .map(|(i, &l)| WarmupLossRecord { sample_id: i as u64, observed_class: class, ce_loss: l })
            .collect()
    }

    #[test]
    fn tau_policies() {
        let r = records(0, &[0.1, 0.2, 3.0, 0.15]);
        assert!((compute_tau(&r, TauPolicy::Mean).unwrap() - 0.8625).abs() < 1e-12);
        let r = records(0, &[4.0, 2.0, 1.0, 3.0]);
        assert_eq!(compute_tau(&r, TauPolicy::Quantile { q: 0.5 }).unwrap(), 2.5);
        assert_eq!(compute_tau(&r, TauPolicy::Quantile { q: 0.0 }).unwrap(), 1.0);
        assert_eq!(compute_tau(&r, TauPolicy::Quantile { q: 1.0 }).unwrap(), 4.0);
        assert!(compute_tau(&[], TauPolicy::Mean).is_err());
        assert!(compute_tau(&r, TauPolicy::Quantile { q: 1.5 }).is_err());
    }

    #[test]
    fn error_rate_examples() {
        let space = LabelSpace::with_classes(3).unwrap();
        let r = records(1, &[0.1, 0.2, 3.0, 0.15]);
        let rates = compute_error_rates(&r, 1.0, &space).unwrap();
        assert_eq!(rates.e, vec![0.0, 0.25, 0.0]);
        assert_eq!(rates.sample_counts, vec![0, 4, 0]);
        assert_eq!(rates.empty_classes, vec![0, 2]);

        let rates = compute_error_rates(&records(0, &[0.1, 0.2]), 5.0, &space).unwrap();
        assert_eq!(rates.e[0], 0.0);
        let rates = compute_error_rates(&records(0, &[6.0, 7.0]), 5.0, &space).unwrap();
        assert_eq!(rates.e[0], 1.0);
    }

    #[test]
    fn losses_equal_to_tau_are_not_errors() {
        let space = LabelSpace::with_classes(2).unwrap();
        let rates = compute_error_rates(&records(0, &[0.5, 0.5, 0.5]), 0.5, &space).unwrap();
        assert_eq!(rates.e[0], 0.0);
    }

    #[test]
    fn error_rates_reject_bad_class() {
        let space = LabelSpace::with_classes(2).unwrap();
        assert!(matches!(
            compute_error_rates(&records(2, &[0.1]), 0.5, &space),
            Err(RaclError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn error_rates_permutation_invariant() {
        let space = LabelSpace::with_classes(3).unwrap();
        let mut r: Vec<WarmupLossRecord> = (0..30)
            .map(|i| WarmupLossRecord {
                sample_id: i,
                observed_class: (i % 3) as usize,
                ce_loss: ((i * 7919) % 13) as f64 / 5.0,
            })
            .collect();
        let a = compute_error_rates(&r, 1.1, &space).unwrap();
        r.reverse();
        r.swap(3, 17);
        assert_eq!(a, compute_error_rates(&r, 1.1, &space).unwrap());
    }

    #[test]
    fn alpha_examples() {
        let p = AlphaParams::default();
        let rates = ClassErrorRates {
            e: vec![0.25, 0.0, 1.0],
            tau: 1.0,
            sample_counts: vec![4, 4, 4],
            empty_classes: vec![],
        };
        let a = compute_alpha(&rates, &p);
        assert!((a[0] - 0.05 / 0.26).abs() < 1e-12);
        assert_eq!(a[1], 0.9);
        assert!((a[2] - 0.049_504_950_495_049_5).abs() < 1e-12);
    }

    #[test]
    fn alpha_params_validation() {
        assert!(AlphaParams::new(0.0, 0.01, 0.9).is_err());
        assert!(AlphaParams::new(0.05, 0.0, 0.9).is_err());
        assert!(AlphaParams::new(0.05, 0.01, 1.0).is_err());
        assert!(AlphaParams::new(0.05, 0.01, 0.5).is_ok());
    }

    #[test]
    fn records_csv_roundtrip() {
        let r = records(1, &[0.25, 1.5]);
        let mut buf = Vec::new();
        write_records_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("sample_id,observed_class,ce_loss\n"));
        assert_eq!(read_records_csv(buf.as_slice()).unwrap(), r);
    }
}
