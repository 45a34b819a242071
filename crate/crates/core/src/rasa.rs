//! Regularized adaptive sparse array design and the dynamic-environment
//! simulator.
//!
//! Stage 1 initializes the selection vector by reweighted l1 minimization of
//! the combined beamforming objective; stage 2 iterates the threshold-hugged
//! surrogate penalty with the group constraints until the selection
//! stabilizes, then binarizes per-group and re-fits combined weights on the
//! selected support.
//!
//! [`dynamic_simulation`] drives the whole switching workflow over a
//! scenario timeline: sense with the complementary set (or the nested array
//! for the coarray strategy), reconfigure, filter, and re-sense whenever the
//! realized SINR drops by the declared margin.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::array::{AngleGrid, ArrayGeometry, GroupStructure};
use crate::baselines;
use crate::beamform::{self, DesiredPattern};
use crate::cone::{ConeProblem, LinExpr, SolveStatus};
use crate::dcsa::SplitDesign;
use crate::linalg;
use crate::signal::{self, CovarianceEstimate, Scenario, SnapshotBlock};
use crate::surrogate;
use crate::{Error, Result};

const SNAP_EPS: f64 = 1e-8;

/// Parameters of the adaptive design.
#[derive(Debug, Clone)]
pub struct RasaParams {
    /// Trade-off β between output power and pattern deviation. `None`
    /// selects [`default_beta`].
    pub beta: Option<f64>,
    /// Penalty weight ρ of the stage-2 (group-constrained) subproblems.
    pub rho: f64,
    /// Penalty weight of the reweighted initialization. `None` walks a
    /// deterministic ladder downward from `0.02 · p*` (p* = full-array
    /// minimum output power) until the surviving support is comfortably
    /// larger than the group count: the reweighted stage cannot control
    /// cardinality by itself and over-pruning starves the group stage.
    pub reweight_rho: Option<f64>,
    pub kappa: f64,
    pub zeta: f64,
    /// Reweighting floor γ in `c = 1 ⊘ (z̄ + γ)`.
    pub gamma: f64,
    pub reweight_tol: f64,
    pub reweight_max_iter: usize,
    pub stage2_tol: f64,
    pub stage2_max_iter: usize,
    pub solver_tol: f64,
    pub solver_max_iter: usize,
}

impl Default for RasaParams {
    fn default() -> Self {
        Self {
            beta: None,
            rho: 1.0,
            reweight_rho: None,
            kappa: 0.5,
            zeta: 0.001,
            gamma: 1e-4,
            reweight_tol: 1e-4,
            reweight_max_iter: 30,
            stage2_tol: 1e-4,
            stage2_max_iter: 50,
            solver_tol: 1e-9,
            solver_max_iter: 200,
        }
    }
}

/// Scale reference for the reweighted penalty: the minimum full-array
/// output power `1/(a^H R⁻¹ a)`, i.e. what beamforming cannot remove.
fn capon_power_scale(r_f: &CovarianceEstimate, geom: &ArrayGeometry) -> Result<f64> {
    let w = beamform::capon_weights(r_f, geom)?;
    Ok(w.vector.dotc(&(r_f.matrix() * &w.vector)).re.abs())
}

/// Default trade-off `β = p* / ‖f_d‖²`: the minimum full-array output power
/// `p* = 1/(a^H R⁻¹ a)` over the energy of the sidelobe template, so the
/// two objective terms enter at comparable magnitude. Larger β buys lower
/// sidelobes at the price of shallower interference nulls.
pub fn default_beta(
    r_f: &CovarianceEstimate,
    geom: &ArrayGeometry,
    pattern: &DesiredPattern,
) -> Result<f64> {
    let template_energy = pattern.magnitude().norm_squared();
    if template_energy == 0.0 {
        return Ok(0.0);
    }
    Ok(capon_power_scale(r_f, geom)? / template_energy)
}

/// Adaptive design outcome.
#[derive(Debug, Clone)]
pub struct AdaptiveDesign {
    /// Binary selection vector (one antenna per group).
    pub z: DVector<f64>,
    /// Selected antenna indices, one per group.
    pub selection: Vec<usize>,
    /// Combined weights re-fit on the support, embedded full-length.
    pub w: DVector<Complex64>,
    /// Output SINR, filled by callers that know the true scenario.
    pub sinr_db: Option<f64>,
    /// Fractional selection from the reweighted stage.
    pub init_z: DVector<f64>,
    /// Stage-2 per-iteration `‖z^{(k+1)} − z^{(k)}‖₂`.
    pub trace: Vec<f64>,
    /// Stage-2 selection iterates, starting from the (clamped) reweighted
    /// initialization.
    pub z_iterates: Vec<DVector<f64>>,
    pub reweight_iterations: usize,
    /// False when stage 2 hit its iteration cap; the best feasible
    /// binarization is still returned.
    pub converged: bool,
    pub beta: f64,
    pub diagonally_loaded: bool,
}

/// Collect switched data over the complementary set and return the
/// full-array covariance estimate, diagonally loaded per the beamforming
/// policy when ill-conditioned.
pub fn estimate_full_covariance(
    arrays: &[Vec<usize>],
    sc: &Scenario,
    geom: &ArrayGeometry,
    t_per_array: usize,
    seed: u64,
) -> Result<CovarianceEstimate> {
    let (_, cov) = signal::switched_collection(arrays, sc, geom, t_per_array, seed)?;
    apply_loading_policy(cov)
}

fn apply_loading_policy(cov: CovarianceEstimate) -> Result<CovarianceEstimate> {
    let (min, max) = linalg::eigen_extrema(cov.matrix());
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if min > 0.0 && condition <= linalg::CONDITION_LIMIT {
        return Ok(cov);
    }
    let n = cov.dim();
    let tr: f64 = cov.matrix().diagonal().iter().map(|c| c.re).sum();
    let eps = linalg::LOADING_SCALE * tr.abs().max(f64::MIN_POSITIVE) / n as f64;
    let mut m = cov.matrix().clone();
    for i in 0..n {
        m[(i, i)] += Complex64::new(eps, 0.0);
    }
    CovarianceEstimate::new(m, cov.kind())
}

struct SelectionVars {
    n: usize,
}

impl SelectionVars {
    fn w_pair(&self, antenna: usize) -> (usize, usize) {
        (2 * antenna, 2 * antenna + 1)
    }

    fn z_index(&self, antenna: usize) -> usize {
        2 * self.n + antenna
    }

    fn decode_w(&self, primal: &[f64]) -> DVector<Complex64> {
        DVector::from_fn(self.n, |i, _| {
            let (re, im) = self.w_pair(i);
            Complex64::new(primal[re], primal[im])
        })
    }

    fn decode_z(&self, primal: &[f64]) -> DVector<f64> {
        DVector::from_fn(self.n, |i, _| {
            let v = primal[self.z_index(i)].clamp(0.0, 1.0);
            if v < SNAP_EPS {
                0.0
            } else {
                v
            }
        })
    }
}

/// Build the shared part of the selection subproblems: variables (w, z, u),
/// the quadratic-plus-pattern epigraph
/// `u ≥ w^H R w + β ‖w^H A_s − f‖²`, the unit-gain equality, and the
/// per-antenna magnitude cones. Linear penalty coefficients on z are added
/// by the callers.
fn build_selection_problem(
    r_f: &CovarianceEstimate,
    geom: &ArrayGeometry,
    a_s: &DMatrix<Complex64>,
    f: &DVector<Complex64>,
    beta: f64,
    penalty: &[f64],
) -> Result<(ConeProblem, SelectionVars)> {
    let n = geom.num_antennas();
    let vars = SelectionVars { n };
    let mut p = ConeProblem::new();
    for _ in 0..n {
        p.add_complex_var();
    }
    for _ in 0..n {
        p.add_var();
    }

    // unit gain
    let a = geom.steer_vector();
    let mut re = LinExpr::default();
    let mut im = LinExpr::default();
    for i in 0..n {
        let (wr, wi) = vars.w_pair(i);
        re.push(wr, a[i].re).push(wi, a[i].im);
        im.push(wr, a[i].im).push(wi, -a[i].re);
    }
    p.add_equality(re, 1.0);
    p.add_equality(im, 0.0);

    // |w| ≤ z
    for i in 0..n {
        let (wr, wi) = vars.w_pair(i);
        p.lift_complex_magnitude(wr, wi, vars.z_index(i));
    }

    // u ≥ ‖F w‖² + β ‖w^H A_s − f‖² with R = F^H F
    let factor = linalg::psd_factor(r_f.matrix(), 1e-14)?;
    let w_pairs: Vec<(usize, usize)> = (0..n).map(|i| vars.w_pair(i)).collect();
    let mut exprs = Vec::with_capacity(2 * factor.nrows() + 2 * a_s.ncols());
    for row in 0..factor.nrows() {
        let mut ere = LinExpr::default();
        let mut eim = LinExpr::default();
        for (j, &(wr, wi)) in w_pairs.iter().enumerate() {
            let c = factor[(row, j)];
            ere.push(wr, c.re).push(wi, -c.im);
            eim.push(wr, c.im).push(wi, c.re);
        }
        exprs.push(ere);
        exprs.push(eim);
    }
    let sb = beta.sqrt();
    for k in 0..a_s.ncols() {
        let mut ere = LinExpr::constant(-sb * f[k].re);
        let mut eim = LinExpr::constant(-sb * f[k].im);
        for i in 0..n {
            let (wr, wi) = vars.w_pair(i);
            let av = a_s[(i, k)];
            // w^H a_k entry: conj(w_i) a_ik
            ere.push(wr, sb * av.re).push(wi, sb * av.im);
            eim.push(wr, sb * av.im).push(wi, -sb * av.re);
        }
        exprs.push(ere);
        exprs.push(eim);
    }
    let u = p.lift_squared_norm(exprs);
    p.add_objective_term(u, 1.0);

    for (i, &c) in penalty.iter().enumerate() {
        if c != 0.0 {
            p.add_objective_term(vars.z_index(i), c);
        }
    }
    Ok((p, vars))
}

/// Reweighted l1 initialization: iterate
/// `min w^H R w + β‖w^H A_s − f‖² + ρ cᵀ z̄` with `c = 1 ⊘ (z̄ + γ)` from
/// `z̄ = 1` until the selection stalls. Returns the fractional selection and
/// the iteration count.
pub fn reweighted_l1_init(
    r_f: &CovarianceEstimate,
    geom: &ArrayGeometry,
    grid: &AngleGrid,
    pattern: &DesiredPattern,
    beta: f64,
    rho: f64,
    gamma: f64,
    max_iter: usize,
) -> Result<(DVector<f64>, usize)> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
    }
    let n = geom.num_antennas();
    let a_s = geom.manifold_matrix(grid)?;
    let f = pattern.complex();
    let mut z = DVector::<f64>::from_element(n, 1.0);
    let mut iterations = 0;
    for _ in 0..max_iter {
        let penalty: Vec<f64> = z.iter().map(|&zi| rho / (zi + gamma)).collect();
        let (p, vars) = build_selection_problem(r_f, geom, &a_s, &f, beta, &penalty)?;
        let sol = p.solve(1e-9, 200)?;
        if !matches!(sol.status, SolveStatus::Optimal | SolveStatus::MaxIter) {
            return Err(Error::Solver(format!(
                "reweighted subproblem reported {:?}",
                sol.status
            )));
        }
        let z_new = vars.decode_z(&sol.primal);
        iterations += 1;
        let delta = (&z_new - &z).norm();
        z = z_new;
        if delta < 1e-4 {
            break;
        }
    }
    Ok((z, iterations))
}

/// Full adaptive design from a given full-array covariance.
pub fn run_rasa(
    r_f: &CovarianceEstimate,
    geom: &ArrayGeometry,
    groups: &GroupStructure,
    grid: &AngleGrid,
    pattern: &DesiredPattern,
    params: &RasaParams,
) -> Result<AdaptiveDesign> {
    let beta = match params.beta {
        Some(b) => b,
        None => default_beta(r_f, geom, pattern)?,
    };
    let run_init = |rho: f64| {
        reweighted_l1_init(
            r_f,
            geom,
            grid,
            pattern,
            beta,
            rho,
            params.gamma,
            params.reweight_max_iter,
        )
    };
    let (init_z, reweight_iterations) = match params.reweight_rho {
        Some(rho) => run_init(rho)?,
        None => {
            // keep at least L + L/4 antennas alive; a support of exactly L
            // leaves the group stage no freedom at all
            let l = groups.num_groups();
            let target = l + (l / 4).max(1);
            let scale = capon_power_scale(r_f, geom)?;
            let mut picked = None;
            for exp in 0..6 {
                let rho = 0.02 * scale / (2f64.powi(exp));
                let out = run_init(rho)?;
                let alive = out.0.iter().filter(|&&v| v > 10.0 * params.gamma).count();
                let last = exp == 5;
                if alive >= target || last {
                    picked = Some(out);
                    break;
                }
            }
            picked.expect("ladder always yields a result")
        }
    };
    let z0 = init_z.map(|v| v.clamp(0.0, 1.0));
    run_rasa_from(r_f, geom, groups, grid, pattern, &z0, params).map(|mut d| {
        d.init_z = init_z;
        d.reweight_iterations = reweight_iterations;
        d
    })
}

/// Stage 2 of the adaptive design from an explicit starting selection
/// (entries in [0, 1]; group feasibility of the start is not required).
pub fn run_rasa_from(
    r_f: &CovarianceEstimate,
    geom: &ArrayGeometry,
    groups: &GroupStructure,
    grid: &AngleGrid,
    pattern: &DesiredPattern,
    z0: &DVector<f64>,
    params: &RasaParams,
) -> Result<AdaptiveDesign> {
    let n = geom.num_antennas();
    if groups.num_antennas() != n || r_f.dim() != n {
        return Err(Error::Domain(
            "array, group structure, and covariance sizes disagree".into(),
        ));
    }
    let beta = match params.beta {
        Some(b) => b,
        None => default_beta(r_f, geom, pattern)?,
    };
    let a_s = geom.manifold_matrix(grid)?;
    let f = pattern.complex();

    let mut z = z0.clone();
    let mut trace = Vec::new();
    let mut z_iterates = vec![z.clone()];
    let mut converged = false;
    for _ in 0..params.stage2_max_iter {
        let tau = surrogate::update_threshold_vector(&z, params.kappa, params.zeta)?;
        let g = surrogate::phi_subgradient(z.as_slice(), tau.values.as_slice())?;
        let penalty: Vec<f64> = g.iter().map(|&gi| params.rho * gi).collect();
        let (mut p, vars) = build_selection_problem(r_f, geom, &a_s, &f, beta, &penalty)?;
        // unit group sums
        for l in 0..groups.num_groups() {
            let mut e = LinExpr::default();
            for i in groups.members_of(l) {
                e.push(vars.z_index(i), 1.0);
            }
            p.add_equality(e, 1.0);
        }
        let sol = p.solve(params.solver_tol, params.solver_max_iter)?;
        if !matches!(sol.status, SolveStatus::Optimal | SolveStatus::MaxIter) {
            return Err(Error::Solver(format!(
                "selection subproblem reported {:?}",
                sol.status
            )));
        }
        let z_new = vars.decode_z(&sol.primal);
        let _ = vars.decode_w(&sol.primal);
        let delta = (&z_new - &z).norm();
        trace.push(delta);
        z_iterates.push(z_new.clone());
        z = z_new;
        if delta < params.stage2_tol {
            converged = true;
            break;
        }
    }

    // binarize per group: argmax, ties to the lowest index
    let mut selection = Vec::with_capacity(groups.num_groups());
    let mut z_binary = DVector::<f64>::zeros(n);
    for l in 0..groups.num_groups() {
        let mut best = groups.members_of(l).start;
        for i in groups.members_of(l) {
            if z[i] > z[best] {
                best = i;
            }
        }
        selection.push(best);
        z_binary[best] = 1.0;
    }

    // re-fit combined weights on the selected support
    let sub = geom.subarray(&selection)?;
    let r_sub = r_f.restricted(&selection);
    let w_fit = beamform::combined_weights(&r_sub, &sub, grid, pattern, beta)?;
    let mut w = DVector::<Complex64>::zeros(n);
    for (s, &i) in selection.iter().enumerate() {
        w[i] = w_fit.vector[s];
    }

    Ok(AdaptiveDesign {
        z: z_binary,
        selection,
        w,
        sinr_db: None,
        init_z: z0.clone(),
        trace,
        z_iterates,
        reweight_iterations: 0,
        converged,
        beta,
        diagonally_loaded: w_fit.diagonally_loaded,
    })
}

/// Reconfiguration strategy in the dynamic simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Design once from the initial sensing, never reconfigure.
    Fixed,
    /// Sense with the complementary set, reconfigure on SINR drops.
    Rcas,
    /// Sense with the nested array and reconfigure from the augmented
    /// covariance.
    Coarray,
}

/// One scenario segment lasting `duration` samples.
#[derive(Debug, Clone)]
pub struct TimelineSegment {
    pub scenario: Scenario,
    pub duration: usize,
}

/// Whether a trace block was spent sensing or filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TracePhase {
    Sensing,
    Filtering,
}

/// One block of the simulated timeline.
#[derive(Debug, Clone)]
pub struct TracePoint {
    /// Sample index of the block start.
    pub sample_index: usize,
    /// Realized output SINR of the active weights under the block's
    /// scenario (ground-truth instrumentation).
    pub sinr_db: f64,
    /// Active antennas during the block (full-aperture indices for the
    /// switched arrays; nested-array positions are reported as indices into
    /// the aperture grid).
    pub active: Vec<usize>,
    pub phase: TracePhase,
}

/// Dynamic-environment simulation settings.
#[derive(Debug, Clone)]
pub struct DynamicConfig {
    pub strategy: Strategy,
    /// Samples per block; each sensing window spans M blocks (one per
    /// complementary array).
    pub t: usize,
    pub seed: u64,
    pub rasa: RasaParams,
    /// Re-sense once the realized SINR sits this far below the post-design
    /// baseline...
    pub drop_db: f64,
    /// ...for this many consecutive blocks.
    pub detect_blocks: usize,
}

impl Default for DynamicConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Rcas,
            t: 500,
            seed: 0,
            rasa: RasaParams::default(),
            drop_db: 3.0,
            detect_blocks: 2,
        }
    }
}

enum Mode {
    Sensing { window: usize, blocks: Vec<SnapshotBlock> },
    Filtering,
}

struct SensingKit {
    /// Active antenna sets per sensing window.
    windows: Vec<Vec<usize>>,
    /// Filtering weights during each sensing window (full aperture length
    /// for switched arrays; nested length for the coarray strategy).
    weights: Vec<DVector<Complex64>>,
    /// Geometry the sensing weights apply to.
    geom: ArrayGeometry,
    /// Nested positions for coarray augmentation, when applicable.
    nested_positions: Option<Vec<i64>>,
}

fn block_seed(master: u64, block: usize) -> u64 {
    master.wrapping_add((block as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Simulate one strategy over the timeline, emitting one trace point per
/// block of `cfg.t` samples. The complementary `split` design provides the
/// sensing arrays (and, for the coarray strategy, `nested_positions`
/// provides the sensing geometry).
pub fn dynamic_simulation(
    timeline: &[TimelineSegment],
    geom: &ArrayGeometry,
    groups: &GroupStructure,
    grid: &AngleGrid,
    pattern: &DesiredPattern,
    split: &SplitDesign,
    nested_positions: Option<&[i64]>,
    cfg: &DynamicConfig,
) -> Result<Vec<TracePoint>> {
    if timeline.is_empty() {
        return Err(Error::Domain("timeline must be non-empty".into()));
    }
    if cfg.t == 0 {
        return Err(Error::Domain("block size must be positive".into()));
    }
    let total: usize = timeline.iter().map(|s| s.duration).sum();
    if total % cfg.t != 0 {
        return Err(Error::Domain(format!(
            "total duration {total} must be a multiple of the block size {}",
            cfg.t
        )));
    }
    let n_blocks = total / cfg.t;

    // sensing equipment per strategy
    let kit = match cfg.strategy {
        Strategy::Fixed | Strategy::Rcas => SensingKit {
            windows: split.arrays(),
            weights: split.refit_weights.clone(),
            geom: geom.clone(),
            nested_positions: None,
        },
        Strategy::Coarray => {
            let pos = nested_positions
                .ok_or_else(|| {
                    Error::Domain("coarray strategy needs nested-array positions".into())
                })?
                .to_vec();
            let nested_geom =
                ArrayGeometry::new(pos.clone(), geom.spacing(), geom.steer_angle_deg())?;
            let all: Vec<usize> = (0..nested_geom.num_antennas()).collect();
            let fit = beamform::min_psl_weights(&nested_geom, grid)?;
            let m = groups.group_size();
            SensingKit {
                windows: vec![all; m],
                weights: vec![fit.vector; m],
                geom: nested_geom,
                nested_positions: Some(pos),
            }
        }
    };
    let m_windows = kit.windows.len();

    let scenario_at = |sample: usize| -> &Scenario {
        let mut acc = 0;
        for seg in timeline {
            acc += seg.duration;
            if sample < acc {
                return &seg.scenario;
            }
        }
        &timeline.last().expect("non-empty").scenario
    };

    let mut mode = Mode::Sensing {
        window: 0,
        blocks: Vec::new(),
    };
    let mut deployed: Option<AdaptiveDesign> = None;
    let mut baseline: Option<f64> = None;
    let mut degraded = 0usize;
    let mut trace = Vec::with_capacity(n_blocks);

    for b in 0..n_blocks {
        let start = b * cfg.t;
        let sc = scenario_at(start);
        match mode {
            Mode::Sensing {
                ref mut window,
                ref mut blocks,
            } => {
                let active = &kit.windows[*window];
                let w = &kit.weights[*window];
                let sinr_db = signal::output_sinr(w, sc, &kit.geom)?;
                trace.push(TracePoint {
                    sample_index: start,
                    sinr_db,
                    active: active.clone(),
                    phase: TracePhase::Sensing,
                });
                let block = match cfg.strategy {
                    Strategy::Coarray => {
                        signal::synthesize_snapshots(sc, &kit.geom, cfg.t, block_seed(cfg.seed, b))?
                    }
                    _ => signal::masked_snapshots(
                        sc,
                        geom,
                        cfg.t,
                        block_seed(cfg.seed, b),
                        active,
                    )?,
                };
                blocks.push(block);
                if *window + 1 < m_windows {
                    *window += 1;
                } else {
                    // assemble covariance and reconfigure
                    let stacked = SnapshotBlock::concat(blocks)?;
                    let cov = apply_loading_policy(stacked.sample_covariance()?)?;
                    let cov = match &kit.nested_positions {
                        Some(pos) => {
                            let (aug, _clip) = baselines::coarray_augment(&cov, pos)?;
                            apply_loading_policy(aug)?
                        }
                        None => cov,
                    };
                    let design = run_rasa(&cov, geom, groups, grid, pattern, &cfg.rasa)?;
                    deployed = Some(design);
                    baseline = None;
                    degraded = 0;
                    mode = Mode::Filtering;
                }
            }
            Mode::Filtering => {
                let design = deployed.as_ref().expect("filtering requires a design");
                let sinr_db = signal::output_sinr(&design.w, sc, geom)?;
                trace.push(TracePoint {
                    sample_index: start,
                    sinr_db,
                    active: design.selection.clone(),
                    phase: TracePhase::Filtering,
                });
                let base = *baseline.get_or_insert(sinr_db);
                if cfg.strategy != Strategy::Fixed {
                    if sinr_db <= base - cfg.drop_db {
                        degraded += 1;
                    } else {
                        degraded = 0;
                    }
                    if degraded >= cfg.detect_blocks {
                        mode = Mode::Sensing {
                            window: 0,
                            blocks: Vec::new(),
                        };
                        degraded = 0;
                    }
                }
            }
        }
    }
    Ok(trace)
}
