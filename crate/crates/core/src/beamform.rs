//! Closed-form beamformers and beampattern evaluation.
//!
//! Three weight designs share one constrained-minimization kernel in the
//! lifted (N+1)-dimensional space with `w̃ = [1, wᵀ]ᵀ`:
//!
//! * quiescent — minimizes the sidelobe-pattern deviation `‖w^H A_s − f‖²`,
//! * Capon — minimizes output power `w^H R w`,
//! * combined — minimizes `w^H R w + β ‖w^H A_s − f‖²`,
//!
//! all under the unit-gain constraint `w^H a(θ0) = 1`. The quiescent design
//! is refined by iterating the sidelobe phase toward the achieved response,
//! which converges to a power-pattern fit `min ‖|w^H A_s| − f_d‖₂`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::array::{AngleGrid, ArrayGeometry};
use crate::linalg::HermitianSolve;
use crate::signal::CovarianceEstimate;
use crate::{Error, Result};

/// Phase-iteration stopping rule: stop once the power-pattern deviation
/// decreases by less than this per step.
pub const PHASE_DEVIATION_TOL: f64 = 1e-6;

/// Phase-iteration cap.
pub const PHASE_MAX_ITER: usize = 50;

/// Desired complex sidelobe pattern `f = f_d ⊙ f_p` over the K sidelobe
/// angles of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DesiredPattern {
    magnitude: DVector<f64>,
    phase: DVector<Complex64>,
}

impl DesiredPattern {
    pub fn new(magnitude: DVector<f64>, phase: DVector<Complex64>) -> Result<Self> {
        if magnitude.len() != phase.len() {
            return Err(Error::Domain("magnitude/phase length mismatch".into()));
        }
        if magnitude.iter().any(|&m| m < 0.0) {
            return Err(Error::Domain("pattern magnitude must be nonnegative".into()));
        }
        if phase.iter().any(|p| (p.norm() - 1.0).abs() > 1e-9) {
            return Err(Error::Domain("pattern phase must be unit-modulus".into()));
        }
        Ok(Self { magnitude, phase })
    }

    /// Flat sidelobe template at `sll_db` (relative to the unit mainlobe
    /// gain) with all-ones phase.
    pub fn uniform(grid: &AngleGrid, sll_db: f64) -> Result<Self> {
        let k = grid.num_sidelobe();
        if k == 0 {
            return Err(Error::Domain("grid has no sidelobe angles".into()));
        }
        let mag = crate::db_to_magnitude(sll_db);
        Self::new(
            DVector::from_element(k, mag),
            DVector::from_element(k, Complex64::new(1.0, 0.0)),
        )
    }

    pub fn magnitude(&self) -> &DVector<f64> {
        &self.magnitude
    }

    pub fn phase(&self) -> &DVector<Complex64> {
        &self.phase
    }

    /// The complex template `f = f_d ⊙ f_p`.
    pub fn complex(&self) -> DVector<Complex64> {
        DVector::from_fn(self.magnitude.len(), |k, _| {
            self.phase[k] * Complex64::new(self.magnitude[k], 0.0)
        })
    }

    pub fn with_phase(&self, phase: DVector<Complex64>) -> Result<Self> {
        Self::new(self.magnitude.clone(), phase)
    }

    pub fn len(&self) -> usize {
        self.magnitude.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitude.len() == 0
    }
}

/// Weight vector plus a flag recording whether the solve needed diagonal
/// loading.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub vector: DVector<Complex64>,
    pub diagonally_loaded: bool,
}

/// Beampattern over a full evaluation grid, with the (unnormalized) gain at
/// the steering direction kept separately.
#[derive(Debug, Clone, PartialEq)]
pub struct Beampattern {
    grid: AngleGrid,
    response: DVector<Complex64>,
    steer_gain: Complex64,
}

impl Beampattern {
    pub fn new(grid: AngleGrid, response: DVector<Complex64>, steer_gain: Complex64) -> Result<Self> {
        if response.len() != grid.len() {
            return Err(Error::Domain("response length must match grid".into()));
        }
        Ok(Self {
            grid,
            response,
            steer_gain,
        })
    }

    pub fn grid(&self) -> &AngleGrid {
        &self.grid
    }

    pub fn response(&self) -> &DVector<Complex64> {
        &self.response
    }

    pub fn steer_gain(&self) -> Complex64 {
        self.steer_gain
    }

    /// Magnitude in dB relative to the steering gain, per grid angle.
    pub fn magnitude_db(&self) -> Vec<f64> {
        let g = self.steer_gain.norm();
        self.response
            .iter()
            .map(|r| crate::magnitude_to_db(r.norm() / g))
            .collect()
    }
}

/// Build `B = D D^H` with `D = [fᵀ; −A_s]`, the quadratic form whose lifted
/// evaluation equals the pattern deviation `‖w^H A_s − f‖²`.
fn pattern_matching_matrix(a_s: &DMatrix<Complex64>, f: &DVector<Complex64>) -> DMatrix<Complex64> {
    let (n, k) = a_s.shape();
    let mut d = DMatrix::<Complex64>::zeros(n + 1, k);
    for kk in 0..k {
        d[(0, kk)] = f[kk];
        for i in 0..n {
            d[(i + 1, kk)] = -a_s[(i, kk)];
        }
    }
    &d * d.adjoint()
}

/// Minimize `w̃^H H w̃` subject to `w̃^H ã = 0` and `w̃_0 = 1`, the Lagrangian
/// closed form `w̃ = H⁻¹C (C^H H⁻¹ C)⁻¹ g`. Solved through the equivalent
/// bordered first-order system `[[H, C], [C^H, 0]] [w̃; μ] = [0; g]`, which
/// stays well-posed when H itself is numerically singular (the constraints
/// pin its null directions); explicit diagonal loading is the fallback.
fn lifted_constrained_min(h: &DMatrix<Complex64>, geom: &ArrayGeometry) -> Result<Weights> {
    let n = geom.num_antennas();
    let a = geom.steer_vector();
    let mut c = DMatrix::<Complex64>::zeros(n + 1, 2);
    c[(0, 0)] = Complex64::new(-1.0, 0.0);
    for i in 0..n {
        c[(i + 1, 0)] = a[i];
    }
    c[(0, 1)] = Complex64::new(1.0, 0.0);

    let dim = n + 3;
    let assemble = |hm: &DMatrix<Complex64>| {
        let mut k = DMatrix::<Complex64>::zeros(dim, dim);
        k.view_mut((0, 0), (n + 1, n + 1)).copy_from(hm);
        k.view_mut((0, n + 1), (n + 1, 2)).copy_from(&c);
        k.view_mut((n + 1, 0), (2, n + 1)).copy_from(&c.adjoint());
        k
    };
    let mut rhs = DVector::<Complex64>::zeros(dim);
    rhs[n + 2] = Complex64::new(1.0, 0.0);

    let k = assemble(h);
    let lu = k.clone().lu();
    if let Some(mut sol) = lu.solve(&rhs) {
        // one step of iterative refinement
        let resid = &rhs - &k * &sol;
        if let Some(corr) = lu.solve(&resid) {
            sol += corr;
        }
        if sol.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Ok(Weights {
                vector: sol.rows(1, n).into_owned(),
                diagonally_loaded: false,
            });
        }
    }
    // fallback: diagonal loading on H
    let trace: f64 = h.diagonal().iter().map(|v| v.re).sum();
    let eps = crate::linalg::LOADING_SCALE * trace.abs().max(f64::MIN_POSITIVE) / (n + 1) as f64;
    let mut loaded = h.clone();
    for i in 0..n + 1 {
        loaded[(i, i)] += Complex64::new(eps, 0.0);
    }
    let sol = assemble(&loaded).lu().solve(&rhs).ok_or_else(|| {
        let (min, max) = crate::linalg::eigen_extrema(h);
        Error::Numerical {
            what: "constrained solve singular even after diagonal loading".into(),
            condition: if min != 0.0 { max / min } else { f64::INFINITY },
        }
    })?;
    Ok(Weights {
        vector: sol.rows(1, n).into_owned(),
        diagonally_loaded: true,
    })
}

/// Quiescent (deterministic) weights for the given sidelobe template:
/// `min ‖w^H A_s − f‖²  s.t.  w^H a(θ0) = 1`.
pub fn quiescent_weights(
    geom: &ArrayGeometry,
    grid: &AngleGrid,
    pattern: &DesiredPattern,
) -> Result<Weights> {
    let a_s = geom.manifold_matrix(grid)?;
    if pattern.len() != a_s.ncols() {
        return Err(Error::Domain(format!(
            "pattern has {} entries, grid has {} sidelobe angles",
            pattern.len(),
            a_s.ncols()
        )));
    }
    let b = pattern_matching_matrix(&a_s, &pattern.complex());
    lifted_constrained_min(&b, geom)
}

/// One phase-update step: project the achieved response onto unit modulus,
/// mapping exact zeros to phase 1.
pub fn phase_update(response: &DVector<Complex64>) -> DVector<Complex64> {
    response.map(|v| {
        let m = v.norm();
        if m == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            v / m
        }
    })
}

/// Sidelobe response `w^H A_s` as a length-K vector.
pub fn sidelobe_response(w: &DVector<Complex64>, a_s: &DMatrix<Complex64>) -> DVector<Complex64> {
    DVector::from_fn(a_s.ncols(), |k, _| w.dotc(&a_s.column(k).into_owned()))
}

/// Result of the iterated quiescent synthesis.
#[derive(Debug, Clone)]
pub struct QuiescentFit {
    pub weights: Weights,
    pub pattern: DesiredPattern,
    /// Power-pattern deviation `‖|w^H A_s| − f_d‖₂` per iteration.
    pub deviations: Vec<f64>,
    pub iterations: usize,
}

/// Iterate quiescent weights and phase updates from an all-ones phase until
/// the power-pattern deviation stalls.
pub fn synthesize_quiescent(
    geom: &ArrayGeometry,
    grid: &AngleGrid,
    magnitude: &DVector<f64>,
) -> Result<QuiescentFit> {
    let a_s = geom.manifold_matrix(grid)?;
    let mut pattern = DesiredPattern::new(
        magnitude.clone(),
        DVector::from_element(magnitude.len(), Complex64::new(1.0, 0.0)),
    )?;
    let mut deviations = Vec::new();
    let mut weights = None;
    let mut prev = f64::INFINITY;
    for _ in 0..PHASE_MAX_ITER {
        let w = quiescent_weights(geom, grid, &pattern)?;
        let resp = sidelobe_response(&w.vector, &a_s);
        let dev = resp
            .iter()
            .zip(magnitude.iter())
            .map(|(r, &m)| (r.norm() - m).powi(2))
            .sum::<f64>()
            .sqrt();
        deviations.push(dev);
        weights = Some(w);
        if prev - dev < PHASE_DEVIATION_TOL {
            break;
        }
        prev = dev;
        pattern = pattern.with_phase(phase_update(&resp))?;
    }
    Ok(QuiescentFit {
        weights: weights.expect("at least one iteration runs"),
        pattern,
        iterations: deviations.len(),
        deviations,
    })
}

/// PSL-optimal quiescent design: minimize the worst sidelobe magnitude
/// under unit gain, `min_w max_k |w^H a(θ_k)|  s.t.  w^H a(θ0) = 1`.
/// This is the achievable peak sidelobe level of a support, used by the
/// enumeration oracle and when measuring binarized designs.
pub fn min_psl_weights(geom: &ArrayGeometry, grid: &AngleGrid) -> Result<Weights> {
    use crate::cone::{ConeProblem, LinExpr, SolveStatus};
    let a_s = geom.manifold_matrix(grid)?;
    let n = geom.num_antennas();
    let mut p = ConeProblem::new();
    let wv: Vec<(usize, usize)> = (0..n).map(|_| p.add_complex_var()).collect();
    let t = p.add_var();
    p.add_objective_term(t, 1.0);
    let a = geom.steer_vector();
    let mut re = LinExpr::default();
    let mut im = LinExpr::default();
    for i in 0..n {
        re.push(wv[i].0, a[i].re).push(wv[i].1, a[i].im);
        im.push(wv[i].0, a[i].im).push(wv[i].1, -a[i].re);
    }
    p.add_equality(re, 1.0);
    p.add_equality(im, 0.0);
    for k in 0..a_s.ncols() {
        let mut ere = LinExpr::default();
        let mut eim = LinExpr::default();
        for i in 0..n {
            let av = a_s[(i, k)];
            ere.push(wv[i].0, av.re).push(wv[i].1, av.im);
            eim.push(wv[i].0, av.im).push(wv[i].1, -av.re);
        }
        p.add_second_order(vec![LinExpr::var(t), ere, eim]);
    }
    // tight designs with many simultaneously active cones can stall the
    // interior point at high accuracy; retreat along a tolerance ladder
    let mut last = None;
    for tol in [1e-8, 1e-7, 1e-6] {
        match p.solve(tol, 300) {
            Ok(sol) if sol.status == SolveStatus::Optimal => {
                return Ok(Weights {
                    vector: DVector::from_fn(n, |i, _| {
                        Complex64::new(sol.primal[wv[i].0], sol.primal[wv[i].1])
                    }),
                    diagonally_loaded: false,
                });
            }
            Ok(sol) => last = Some(Err(Error::Solver(format!(
                "PSL minimization reported {:?}",
                sol.status
            )))),
            Err(e) => last = Some(Err(e)),
        }
    }
    last.expect("ladder ran")
}

/// Capon weights `w = R⁻¹ a / (a^H R⁻¹ a)`.
pub fn capon_weights(r: &CovarianceEstimate, geom: &ArrayGeometry) -> Result<Weights> {
    if r.dim() != geom.num_antennas() {
        return Err(Error::Domain(format!(
            "covariance dimension {} does not match array size {}",
            r.dim(),
            geom.num_antennas()
        )));
    }
    let a = geom.steer_vector();
    let solver = HermitianSolve::new(r.matrix())?;
    let ra = solver.solve_vec(&a);
    let denom = a.dotc(&ra);
    if denom.norm() == 0.0 {
        return Err(Error::Numerical {
            what: "a^H R^{-1} a vanished".into(),
            condition: solver.condition,
        });
    }
    Ok(Weights {
        vector: ra / denom,
        diagonally_loaded: solver.loaded,
    })
}

/// Combined weights minimizing `w^H R w + β ‖w^H A_s − f‖²` under unit gain.
/// At β = 0 the regularizer vanishes and the problem reduces to the Capon
/// design, which is returned directly.
pub fn combined_weights(
    r: &CovarianceEstimate,
    geom: &ArrayGeometry,
    grid: &AngleGrid,
    pattern: &DesiredPattern,
    beta: f64,
) -> Result<Weights> {
    if beta < 0.0 {
        return Err(Error::Domain(format!("beta must be nonnegative, got {beta}")));
    }
    if beta == 0.0 {
        return capon_weights(r, geom);
    }
    let n = geom.num_antennas();
    if r.dim() != n {
        return Err(Error::Domain(format!(
            "covariance dimension {} does not match array size {n}",
            r.dim()
        )));
    }
    let a_s = geom.manifold_matrix(grid)?;
    if pattern.len() != a_s.ncols() {
        return Err(Error::Domain("pattern/grid size mismatch".into()));
    }
    let mut h = pattern_matching_matrix(&a_s, &pattern.complex()) * Complex64::new(beta, 0.0);
    for i in 0..n {
        for j in 0..n {
            h[(i + 1, j + 1)] += r.matrix()[(i, j)];
        }
    }
    lifted_constrained_min(&h, geom)
}

/// Evaluate the beampattern of `w` over every angle of the grid.
pub fn evaluate_pattern(
    w: &DVector<Complex64>,
    geom: &ArrayGeometry,
    grid: &AngleGrid,
) -> Result<Beampattern> {
    if w.len() != geom.num_antennas() {
        return Err(Error::Domain("weight/array size mismatch".into()));
    }
    let mut response = DVector::<Complex64>::zeros(grid.len());
    for (k, &theta) in grid.angles_deg().iter().enumerate() {
        response[k] = w.dotc(&geom.steering_vector(theta)?);
    }
    let steer_gain = w.dotc(&geom.steer_vector());
    Beampattern::new(grid.clone(), response, steer_gain)
}

/// Peak sidelobe level in dB relative to the steering gain.
pub fn peak_sidelobe_level(bp: &Beampattern) -> Result<f64> {
    let g = bp.steer_gain.norm();
    let mut best = f64::NEG_INFINITY;
    let mut any = false;
    for (k, &masked) in bp.grid.sidelobe_mask().iter().enumerate() {
        if masked {
            any = true;
            best = best.max(crate::magnitude_to_db(bp.response[k].norm() / g));
        }
    }
    if !any {
        return Err(Error::Domain("sidelobe mask is empty".into()));
    }
    Ok(best)
}
