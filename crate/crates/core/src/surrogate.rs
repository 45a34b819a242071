//! Piecewise-linear l0 surrogate: the concave under-estimator
//! `φ(b, τ) = Σ_i (1/τ_i)(b_i − max(b_i − τ_i, 0))` of the cardinality
//! function, its subgradient, the affine majorizer used by the iterated
//! convex subproblems, and the threshold-update rules that hug the current
//! iterate from above or below.
//!
//! The subgradient at the kink `b_i = τ_i` is fixed to `1/τ_i` everywhere:
//! that branch is what keeps the penalty active on zero entries, which the
//! feasibility-retention argument relies on.

use nalgebra::{DMatrix, DVector};

use crate::array::GroupStructure;
use crate::{Error, Result};

/// Threshold matrix Π for the array-splitting stage, together with the
/// switch level κ and offset ζ that produced it. All entries lie in (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdMatrix {
    pub values: DMatrix<f64>,
    pub kappa: f64,
    pub zeta: f64,
}

/// Threshold vector τ for the adaptive-selection stage.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdVector {
    pub values: DVector<f64>,
    pub kappa: f64,
    pub zeta: f64,
}

fn check_pair(b: &[f64], tau: &[f64]) -> Result<()> {
    if b.len() != tau.len() {
        return Err(Error::Domain(format!(
            "length mismatch: b has {}, tau has {}",
            b.len(),
            tau.len()
        )));
    }
    if let Some(v) = b.iter().find(|v| **v < 0.0) {
        return Err(Error::Domain(format!("b must be nonnegative, got {v}")));
    }
    if let Some(v) = tau.iter().find(|v| **v <= 0.0) {
        return Err(Error::Domain(format!("tau must be positive, got {v}")));
    }
    Ok(())
}

/// The surrogate value `φ(b, τ) = Σ_i (1/τ_i)(b_i − (b_i − τ_i)^+)`,
/// equal to `Σ_i min(b_i/τ_i, 1)`.
pub fn phi(b: &[f64], tau: &[f64]) -> Result<f64> {
    check_pair(b, tau)?;
    Ok(b.iter()
        .zip(tau)
        .map(|(&bi, &ti)| (bi - (bi - ti).max(0.0)) / ti)
        .sum())
}

/// Surrogate subgradient: 0 above the threshold, `1/τ_i` at or below it.
pub fn phi_subgradient(b: &[f64], tau: &[f64]) -> Result<Vec<f64>> {
    check_pair(b, tau)?;
    Ok(b.iter()
        .zip(tau)
        .map(|(&bi, &ti)| if bi > ti { 0.0 } else { 1.0 / ti })
        .collect())
}

/// Subgradient of `φ(P_l Z c_m, P_l Π c_m)` with respect to the full matrix
/// Z: nonzero only in column `m`, rows of group `l`.
pub fn phi_subgradient_wrt_z(
    z: &DMatrix<f64>,
    pi: &ThresholdMatrix,
    group: usize,
    column: usize,
    groups: &GroupStructure,
) -> Result<DMatrix<f64>> {
    let (n, m) = z.shape();
    if pi.values.shape() != (n, m) {
        return Err(Error::Domain("Z and Π shapes differ".into()));
    }
    if group >= groups.num_groups() || column >= m || n != groups.num_antennas() {
        return Err(Error::Domain(format!(
            "index out of range: group {group}, column {column}"
        )));
    }
    let rows = groups.members_of(group);
    let b: Vec<f64> = rows.clone().map(|i| z[(i, column)]).collect();
    let tau: Vec<f64> = rows.clone().map(|i| pi.values[(i, column)]).collect();
    let g = phi_subgradient(&b, &tau)?;
    let mut out = DMatrix::<f64>::zeros(n, m);
    for (k, i) in rows.enumerate() {
        out[(i, column)] = g[k];
    }
    Ok(out)
}

/// Affine majorizer `φ(b0, τ) + g(b0, τ)ᵀ(b − b0)`; an upper bound on
/// `φ(b, τ)` that is tight at `b0`.
pub fn affine_majorizer(b: &[f64], b0: &[f64], tau: &[f64]) -> Result<f64> {
    check_pair(b, tau)?;
    let base = phi(b0, tau)?;
    let g = phi_subgradient(b0, tau)?;
    Ok(base
        + g.iter()
            .zip(b.iter().zip(b0))
            .map(|(&gi, (&bi, &b0i))| gi * (bi - b0i))
            .sum::<f64>())
}

fn update_one(z: f64, kappa: f64, zeta: f64) -> f64 {
    let raw = if z >= kappa { z - zeta } else { z + zeta };
    raw.clamp(zeta / 2.0, 1.0 - zeta / 2.0)
}

fn check_update_params(kappa: f64, zeta: f64) -> Result<()> {
    if !(zeta > 0.0 && zeta < kappa && kappa < 1.0) {
        return Err(Error::Domain(format!(
            "threshold update needs 0 < ζ < κ < 1, got κ={kappa}, ζ={zeta}"
        )));
    }
    Ok(())
}

/// Threshold matrix update: `Π_ij = Z_ij − ζ` when `Z_ij ≥ κ`, else
/// `Z_ij + ζ`, clamped to `(ζ/2, 1 − ζ/2)` so that Π < 1 always holds.
pub fn update_threshold_matrix(
    z_prev: &DMatrix<f64>,
    kappa: f64,
    zeta: f64,
) -> Result<ThresholdMatrix> {
    check_update_params(kappa, zeta)?;
    if z_prev.iter().any(|&z| !(0.0..=1.0).contains(&z)) {
        return Err(Error::Domain("Z entries must lie in [0, 1]".into()));
    }
    Ok(ThresholdMatrix {
        values: z_prev.map(|z| update_one(z, kappa, zeta)),
        kappa,
        zeta,
    })
}

/// Elementwise analogue of [`update_threshold_matrix`] for the selection
/// vector of the adaptive stage.
pub fn update_threshold_vector(
    z_prev: &DVector<f64>,
    kappa: f64,
    zeta: f64,
) -> Result<ThresholdVector> {
    check_update_params(kappa, zeta)?;
    if z_prev.iter().any(|&z| !(0.0..=1.0).contains(&z)) {
        return Err(Error::Domain("z entries must lie in [0, 1]".into()));
    }
    Ok(ThresholdVector {
        values: z_prev.map(|z| update_one(z, kappa, zeta)),
        kappa,
        zeta,
    })
}
