//! Ground-truth oracles and the coarray comparison strategy.
//!
//! `enumerate_splittings` and `enumerate_adaptive` brute-force the small
//! design spaces so the iterative algorithms can be measured against exact
//! optima. `nested_array` and `coarray_augment` implement the alternative
//! sensing strategy that rebuilds a full-aperture Toeplitz covariance from
//! the spatial lags of a two-level nested array.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::array::{AngleGrid, ArrayGeometry, GroupStructure};
use crate::beamform::{self, DesiredPattern};
use crate::signal::{self, CovarianceEstimate, CovarianceKind, Scenario};
use crate::{Error, Result};

/// Refuse enumerations beyond this many candidates.
const ENUMERATION_LIMIT: u128 = 1 << 20;

/// One complementary pair with its worst quiescent PSL.
#[derive(Debug, Clone)]
pub struct RankedPair {
    /// Group-choice bits of the first array (bit l picks the antenna of
    /// group l), with bit 0 fixed to zero to deduplicate unordered pairs.
    pub bits: u32,
    /// Antenna indices of the two arrays.
    pub arrays: [Vec<usize>; 2],
    /// PSL of each array's quiescent fit.
    pub psl_db: [f64; 2],
    /// Pair PSL = max of the two.
    pub max_psl_db: f64,
}

impl RankedPair {
    /// N-character activation mask of the first array.
    pub fn selection_mask(&self, n: usize) -> String {
        let mut s = vec![b'0'; n];
        for &i in &self.arrays[0] {
            s[i] = b'1';
        }
        String::from_utf8(s).expect("ascii")
    }
}

/// Enumerate all unordered complementary pair splittings (M = 2), fit the
/// PSL-optimal quiescent weights per array, and rank by the pair PSL
/// (ascending). Each reported value is the achievable peak sidelobe level
/// of that support, which makes the ranking a true lower bound for any
/// design procedure on the same grid.
pub fn enumerate_splittings(
    geom: &ArrayGeometry,
    groups: &GroupStructure,
    grid: &AngleGrid,
) -> Result<Vec<RankedPair>> {
    if groups.group_size() != 2 {
        return Err(Error::Domain(format!(
            "pairwise splitting requires groups of 2, got {}",
            groups.group_size()
        )));
    }
    if groups.num_antennas() != geom.num_antennas() {
        return Err(Error::Domain("group structure does not match array".into()));
    }
    let l = groups.num_groups();
    let count: u128 = 1u128 << (l - 1);
    if l > 20 {
        return Err(Error::TooLarge {
            what: "complementary pair enumeration".into(),
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut pairs: Vec<RankedPair> = (0..count as u32)
        .into_par_iter()
        .map(|bits| {
            let mut first = Vec::with_capacity(l);
            let mut second = Vec::with_capacity(l);
            for g in 0..l {
                let pick = (bits >> g) & 1;
                let base = 2 * g;
                first.push(base + pick as usize);
                second.push(base + 1 - pick as usize);
            }
            let psl = |sel: &[usize]| -> Result<f64> {
                let sub = geom.subarray(sel)?;
                let w = beamform::min_psl_weights(&sub, grid)?;
                let bp = beamform::evaluate_pattern(&w.vector, &sub, grid)?;
                beamform::peak_sidelobe_level(&bp)
            };
            let p0 = psl(&first)?;
            let p1 = psl(&second)?;
            Ok(RankedPair {
                bits,
                arrays: [first, second],
                psl_db: [p0, p1],
                max_psl_db: p0.max(p1),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    pairs.sort_by(|a, b| {
        a.max_psl_db
            .partial_cmp(&b.max_psl_db)
            .expect("finite PSLs")
            .then(a.bits.cmp(&b.bits))
    });
    Ok(pairs)
}

/// Beamformer used when scoring enumerated selections.
#[derive(Debug, Clone, Copy)]
pub enum BeamformerKind<'a> {
    /// Capon weights on the selection's theoretical covariance.
    Adaptive,
    /// Combined weights with the given trade-off and sidelobe template.
    Combined {
        beta: f64,
        grid: &'a AngleGrid,
        pattern: &'a DesiredPattern,
    },
}

/// One scored group-regular selection.
#[derive(Debug, Clone)]
pub struct AdaptiveCandidate {
    /// Mixed-radix encoding: digit l (base M) picks the antenna of group l.
    pub code: u64,
    pub selection: Vec<usize>,
    pub sinr_db: f64,
}

impl AdaptiveCandidate {
    pub fn selection_mask(&self, n: usize) -> String {
        let mut s = vec![b'0'; n];
        for &i in &self.selection {
            s[i] = b'1';
        }
        String::from_utf8(s).expect("ascii")
    }
}

/// Brute-force every one-antenna-per-group selection, score its output SINR
/// under the scenario with the requested beamformer on the theoretical
/// covariance, and rank descending.
pub fn enumerate_adaptive(
    geom: &ArrayGeometry,
    groups: &GroupStructure,
    sc: &Scenario,
    kind: BeamformerKind<'_>,
) -> Result<Vec<AdaptiveCandidate>> {
    if groups.num_antennas() != geom.num_antennas() {
        return Err(Error::Domain("group structure does not match array".into()));
    }
    let l = groups.num_groups();
    let m = groups.group_size();
    let count = (m as u128).checked_pow(l as u32).unwrap_or(u128::MAX);
    if count > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            what: "adaptive selection enumeration".into(),
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    let full_r = signal::theoretical_covariance(sc, geom)?;
    let mut candidates: Vec<AdaptiveCandidate> = (0..count as u64)
        .into_par_iter()
        .map(|code| {
            let mut selection = Vec::with_capacity(l);
            let mut c = code;
            for g in 0..l {
                let digit = (c % m as u64) as usize;
                c /= m as u64;
                selection.push(g * m + digit);
            }
            let sub = geom.subarray(&selection)?;
            let r_sub = full_r.restricted(&selection);
            let w = match kind {
                BeamformerKind::Adaptive => beamform::capon_weights(&r_sub, &sub)?,
                BeamformerKind::Combined { beta, grid, pattern } => {
                    beamform::combined_weights(&r_sub, &sub, grid, pattern, beta)?
                }
            };
            let sinr_db = signal::output_sinr(&w.vector, sc, &sub)?;
            Ok(AdaptiveCandidate {
                code,
                selection,
                sinr_db,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    candidates.sort_by(|a, b| {
        b.sinr_db
            .partial_cmp(&a.sinr_db)
            .expect("finite SINRs")
            .then(a.code.cmp(&b.code))
    });
    Ok(candidates)
}

/// Canonical two-level nested array: `n1` dense inner elements at grid
/// positions `0..n1` and `n2` outer elements at `(n1+1)(k+1) − 1`. The
/// difference coarray covers lags `0..(n1+1)n2 − 1` contiguously, which must
/// equal `aperture` exactly for the array to fit the requested span.
pub fn nested_array(budget: usize, aperture: usize) -> Result<Vec<i64>> {
    if budget < 2 || aperture < 2 {
        return Err(Error::Domain(
            "nested array needs at least two antennas and two positions".into(),
        ));
    }
    // among the level splits that span the aperture exactly, prefer the
    // most balanced one (canonical nested arrays split near-evenly)
    let mut best: Option<usize> = None;
    for n1 in 1..budget {
        let n2 = budget - n1;
        if (n1 + 1) * n2 == aperture {
            let dist = (2 * n1).abs_diff(budget);
            match best {
                Some(b) if (2 * b).abs_diff(budget) <= dist => {}
                _ => best = Some(n1),
            }
        }
    }
    if let Some(n1) = best {
        let n2 = budget - n1;
        let mut pos: Vec<i64> = (0..n1 as i64).collect();
        for k in 0..n2 {
            pos.push(((n1 + 1) * (k + 1) - 1) as i64);
        }
        return verify_hole_free(pos, aperture);
    }
    Err(Error::Domain(format!(
        "no two-level nested array with {budget} antennas spans aperture {aperture}"
    )))
}

fn verify_hole_free(pos: Vec<i64>, aperture: usize) -> Result<Vec<i64>> {
    let missing = missing_lags(&pos, aperture);
    if missing.is_empty() {
        Ok(pos)
    } else {
        Err(Error::CoarrayHole(missing))
    }
}

/// Lags in `0..aperture` absent from the difference set of `positions`.
pub fn missing_lags(positions: &[i64], aperture: usize) -> Vec<usize> {
    let mut present = vec![false; aperture];
    for &a in positions {
        for &b in positions {
            let lag = (a - b).unsigned_abs() as usize;
            if lag < aperture {
                present[lag] = true;
            }
        }
    }
    present
        .iter()
        .enumerate()
        .filter(|(_, &p)| !p)
        .map(|(i, _)| i)
        .collect()
}

/// Rebuild a full-aperture covariance from a sparse array's sample
/// covariance: group entries by spatial lag, average within each lag, and
/// assemble the Hermitian Toeplitz matrix. Indefinite results are repaired
/// by clipping negative eigenvalues at zero; the clip magnitude (largest
/// eigenvalue removed) is returned alongside.
pub fn coarray_augment(
    r_sparse: &CovarianceEstimate,
    positions: &[i64],
) -> Result<(CovarianceEstimate, f64)> {
    let p = positions.len();
    if r_sparse.dim() != p {
        return Err(Error::Domain(format!(
            "covariance is {}×{} but {p} positions were given",
            r_sparse.dim(),
            r_sparse.dim()
        )));
    }
    let min = *positions.iter().min().expect("non-empty");
    let max = *positions.iter().max().expect("non-empty");
    let n = (max - min) as usize + 1;
    let missing = missing_lags(positions, n);
    if !missing.is_empty() {
        return Err(Error::CoarrayHole(missing));
    }
    let mut sums = vec![Complex64::new(0.0, 0.0); n];
    let mut counts = vec![0usize; n];
    for i in 0..p {
        for j in 0..p {
            let lag = positions[i] - positions[j];
            if lag >= 0 {
                let u = lag as usize;
                sums[u] += r_sparse.matrix()[(i, j)];
                counts[u] += 1;
            }
        }
    }
    let means: Vec<Complex64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s / Complex64::new(c as f64, 0.0))
        .collect();
    let mut toeplitz = DMatrix::<Complex64>::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            toeplitz[(a, b)] = if a >= b {
                means[a - b]
            } else {
                means[b - a].conj()
            };
        }
    }
    // lag 0 averages |y|² so the diagonal is real by construction
    let herm = crate::linalg::hermitian_part(&toeplitz);
    let (min_eig, _) = crate::linalg::eigen_extrema(&herm);
    if min_eig >= 0.0 {
        return Ok((
            CovarianceEstimate::new(herm, CovarianceKind::Augmented)?,
            0.0,
        ));
    }
    // PSD repair: clip negative eigenvalues at zero
    let eig = herm.symmetric_eigen();
    let clip = -min_eig;
    let mut scaled = eig.eigenvectors.clone();
    for j in 0..n {
        let v = eig.eigenvalues[j].max(0.0);
        for i in 0..n {
            scaled[(i, j)] *= Complex64::new(v, 0.0);
        }
    }
    let repaired = &scaled * eig.eigenvectors.adjoint();
    Ok((
        CovarianceEstimate::new(
            crate::linalg::hermitian_part(&repaired),
            CovarianceKind::Augmented,
        )?,
        clip,
    ))
}
