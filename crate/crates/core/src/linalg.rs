//! Shared dense Hermitian helpers: eigensolves with the diagonal-loading
//! policy, Hermitian square roots, and factor extraction for cone lifting.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

/// Condition-number threshold beyond which diagonal loading is applied.
pub(crate) const CONDITION_LIMIT: f64 = 1e12;

/// Loading magnitude is `LOADING_SCALE * tr(R) / n`.
pub(crate) const LOADING_SCALE: f64 = 1e-8;

pub(crate) fn hermitian_part(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Eigen-based solver for Hermitian systems. Applies the declared diagonal
/// loading whenever the condition estimate exceeds [`CONDITION_LIMIT`] or the
/// matrix is not positive definite, and records that it did so.
pub(crate) struct HermitianSolve {
    vecs: DMatrix<Complex64>,
    inv_vals: DVector<f64>,
    pub loaded: bool,
    pub condition: f64,
}

impl HermitianSolve {
    pub fn new(m: &DMatrix<Complex64>) -> Result<Self> {
        let n = m.nrows();
        let herm = hermitian_part(m);
        let trace = herm.diagonal().iter().map(|c| c.re).sum::<f64>();
        let eig = herm.symmetric_eigen();
        let mut vals = eig.eigenvalues.clone();
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        let mut loaded = false;
        // load only when the system is numerically singular; merely large
        // condition numbers solve fine through the eigenbasis and loading
        // them would perturb the closed-form designs past their contracts
        if min <= 1e-14 * max.abs().max(f64::MIN_POSITIVE) {
            let eps = LOADING_SCALE * trace.abs().max(f64::MIN_POSITIVE) / n as f64;
            vals.iter_mut().for_each(|v| *v += eps);
            loaded = true;
            let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            if min <= 0.0 {
                return Err(Error::Numerical {
                    what: "Hermitian system remains singular after diagonal loading".into(),
                    condition,
                });
            }
        }
        Ok(Self {
            vecs: eig.eigenvectors,
            inv_vals: vals.map(|v| 1.0 / v),
            loaded,
            condition,
        })
    }

    pub fn solve_vec(&self, rhs: &DVector<Complex64>) -> DVector<Complex64> {
        let mut y = self.vecs.adjoint() * rhs;
        for (i, v) in y.iter_mut().enumerate() {
            *v *= Complex64::new(self.inv_vals[i], 0.0);
        }
        &self.vecs * y
    }

    pub fn solve_mat(&self, rhs: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut y = self.vecs.adjoint() * rhs;
        for i in 0..y.nrows() {
            for j in 0..y.ncols() {
                y[(i, j)] *= Complex64::new(self.inv_vals[i], 0.0);
            }
        }
        &self.vecs * y
    }
}

/// Hermitian PSD square root. Eigenvalues below `-tol * max` are rejected;
/// small negatives inside the tolerance are clamped to zero.
pub(crate) fn hermitian_sqrt(m: &DMatrix<Complex64>, tol: f64) -> Result<DMatrix<Complex64>> {
    let herm = hermitian_part(m);
    let eig = herm.symmetric_eigen();
    let max = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(0.0f64, |a, b| a.max(b.abs()));
    let mut vals = eig.eigenvalues.clone();
    for v in vals.iter_mut() {
        if *v < -tol * max.max(1.0) {
            return Err(Error::Domain(format!(
                "matrix is not positive semidefinite (eigenvalue {v:.3e})"
            )));
        }
        *v = v.max(0.0).sqrt();
    }
    let mut scaled = eig.eigenvectors.clone();
    for j in 0..scaled.ncols() {
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= Complex64::new(vals[j], 0.0);
        }
    }
    Ok(&scaled * eig.eigenvectors.adjoint())
}

/// Rank-revealing factor of a Hermitian PSD matrix: returns `F` (r×n) with
/// `R = F^H F`, dropping eigenvalues below `cutoff * max`.
pub(crate) fn psd_factor(m: &DMatrix<Complex64>, cutoff: f64) -> Result<DMatrix<Complex64>> {
    let herm = hermitian_part(m);
    let n = herm.nrows();
    let eig = herm.symmetric_eigen();
    let max = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(0.0f64, |a, b| a.max(b));
    if max < 0.0 {
        return Err(Error::Domain("matrix is negative definite".into()));
    }
    let keep: Vec<usize> = (0..n)
        .filter(|&i| eig.eigenvalues[i] > cutoff * max.max(f64::MIN_POSITIVE))
        .collect();
    let mut fac = DMatrix::<Complex64>::zeros(keep.len(), n);
    for (row, &i) in keep.iter().enumerate() {
        let s = eig.eigenvalues[i].sqrt();
        for j in 0..n {
            fac[(row, j)] = eig.eigenvectors[(j, i)].conj() * Complex64::new(s, 0.0);
        }
    }
    Ok(fac)
}

/// Smallest and largest eigenvalues of a Hermitian matrix.
pub(crate) fn eigen_extrema(m: &DMatrix<Complex64>) -> (f64, f64) {
    let eig = hermitian_part(m).symmetric_eigen();
    let max = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    (min, max)
}
