//! Label-noise-robust classification toolkit.
//!
//! - [`prob`]: simplex primitives, softmax and KL divergence.
//! - [`credal`]: possibility elicitation, the β schedule, credal-set
//!   membership and boundary projection.
//! - [`relax`]: warm-up error rates and adaptive per-class relaxation.
//! - [`losses`]: credal loss, focal loss, cross-entropy and gradients.
//! - [`noise`]: asymmetric label-noise generation with an audit trail.
//! - [`metrics`]: one-vs-rest AUC and AP, precision, recall and F1.
//! - [`trainer`]: the seeded warm-up / main-phase training harness.

pub mod cli;
pub mod config;
pub mod credal;
pub mod data;
pub mod error;
pub mod experiment;
pub mod losses;
pub mod metrics;
pub mod model;
pub mod noise;
pub mod prob;
pub mod relax;
pub mod trainer;

pub use error::{RaclError, Result};
