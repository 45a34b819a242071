//! Sparse array beamformer design by regularized complementary antenna switching.
//!
//! A uniform linear array is partitioned into contiguous groups with one RF
//! front-end per group, and sparse arrays are formed by switching exactly one
//! antenna per group onto its front-end. This crate implements the two design
//! stages built on that switching discipline:
//!
//! 1. **DCSA** ([`dcsa`]) — splitting the aperture into deterministic
//!    complementary sparse arrays, all with controlled quiescent beampatterns,
//!    by solving a cardinality-constrained pattern-synthesis problem through a
//!    piecewise-linear l0 surrogate ([`surrogate`]) and iterated convex
//!    subproblems ([`cone`]).
//! 2. **RASA** ([`rasa`]) — selecting an environment-adapted sparse array and
//!    beamformer from full-aperture covariance gathered by switching among the
//!    complementary arrays, initialized by reweighted l1 minimization.
//!
//! Supporting modules: [`array`] (geometry, steering vectors, groups),
//! [`signal`] (scenarios, covariances, snapshot simulation, output SINR),
//! [`beamform`] (quiescent/Capon/combined closed-form beamformers),
//! [`baselines`] (exhaustive enumeration oracles and the nested-array coarray
//! augmentation strategy).

pub mod array;
pub mod baselines;
pub mod beamform;
pub mod cone;
pub mod dcsa;
mod error;
pub(crate) mod linalg;
pub mod rasa;
pub mod signal;
pub mod surrogate;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Convert a power ratio in dB to linear scale.
pub fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Convert a linear power ratio to dB.
pub fn power_to_db(p: f64) -> f64 {
    10.0 * p.log10()
}

/// Convert an amplitude ratio in dB to linear scale.
pub fn db_to_magnitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

/// Convert a linear amplitude ratio to dB.
pub fn magnitude_to_db(m: f64) -> f64 {
    20.0 * m.log10()
}
