//! K-norm mechanisms for differential privacy.
//!
//! Norm balls given as ℓp balls or membership oracles, exact and Monte
//! Carlo volumes, samplers for the K-norm mechanism, orderings that compare
//! mechanisms, objective perturbation for private logistic regression,
//! private linear regression through sanitized sufficient statistics, and a
//! seeded simulation harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod erm;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linreg;
pub mod ordering;
pub mod rng;
pub mod sampling;
pub mod stats;

pub use error::{Error, Result};
pub use geometry::NormBall;
pub use rng::RngStream;
pub use sampling::MechanismConfig;
