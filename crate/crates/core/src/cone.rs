//! Conic subproblem model and solver interface.
//!
//! Convex subproblems are expressed over a real decision vector as a linear
//! objective with linear equalities, nonnegativity constraints, and
//! second-order cones; complex quantities are pre-split into interleaved
//! (Re, Im) pairs by the builders, and norm objectives are lifted to
//! epigraph variables. Solving is delegated to a homogeneous self-dual
//! interior-point method (the `clarabel` crate), which supplies the
//! infeasibility certificates and residuals this interface reports.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus as ClStatus, SupportedConeT,
};
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

/// Default solve tolerance.
pub const DEFAULT_TOL: f64 = 1e-7;

/// Default iteration cap.
pub const DEFAULT_MAX_ITER: usize = 200;

/// Affine expression `constant + Σ coeff · x[var]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn var(i: usize) -> Self {
        Self {
            terms: vec![(i, 1.0)],
            constant: 0.0,
        }
    }

    pub fn term(i: usize, coeff: f64) -> Self {
        Self {
            terms: vec![(i, coeff)],
            constant: 0.0,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn push(&mut self, i: usize, coeff: f64) -> &mut Self {
        if coeff != 0.0 {
            self.terms.push((i, coeff));
        }
        self
    }

    pub fn offset(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    /// Evaluate at a point.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(i, c)| c * x[i]).sum::<f64>()
    }
}

/// Cone block descriptors, in constraint order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeBlock {
    Zero { dim: usize },
    NonNegative { dim: usize },
    SecondOrder { dim: usize },
}

/// Solver outcome classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
}

/// Residuals at the returned primal-dual point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

/// Primal-dual solution of a [`ConeProblem`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSolution {
    pub status: SolveStatus,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub residuals: Residuals,
    pub iterations: usize,
    pub objective: f64,
}

/// A conic program: minimize `cᵀx` subject to equalities, nonnegativity of
/// affine expressions, and second-order-cone membership of expression
/// blocks.
#[derive(Debug, Clone, Default)]
pub struct ConeProblem {
    num_vars: usize,
    objective: Vec<f64>,
    equalities: Vec<(LinExpr, f64)>,
    nonneg: Vec<LinExpr>,
    socs: Vec<Vec<LinExpr>>,
}

impl ConeProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Cone layout in constraint order.
    pub fn cone_spec(&self) -> Vec<ConeBlock> {
        let mut spec = Vec::new();
        if !self.equalities.is_empty() {
            spec.push(ConeBlock::Zero {
                dim: self.equalities.len(),
            });
        }
        if !self.nonneg.is_empty() {
            spec.push(ConeBlock::NonNegative {
                dim: self.nonneg.len(),
            });
        }
        for s in &self.socs {
            spec.push(ConeBlock::SecondOrder { dim: s.len() });
        }
        spec
    }

    pub fn add_var(&mut self) -> usize {
        self.num_vars += 1;
        self.objective.push(0.0);
        self.num_vars - 1
    }

    /// One complex scalar as an interleaved (Re, Im) pair. This convention
    /// is fixed globally so builders and extractors agree.
    pub fn add_complex_var(&mut self) -> (usize, usize) {
        (self.add_var(), self.add_var())
    }

    /// Accumulate a linear objective coefficient.
    pub fn add_objective_term(&mut self, var: usize, coeff: f64) {
        self.objective[var] += coeff;
    }

    /// Constrain `expr = rhs`.
    pub fn add_equality(&mut self, expr: LinExpr, rhs: f64) {
        self.equalities.push((expr, rhs));
    }

    /// Constrain `expr ≥ 0`.
    pub fn add_nonnegative(&mut self, expr: LinExpr) {
        self.nonneg.push(expr);
    }

    /// Constrain `(e_0, e_1, …) ∈ SOC`, i.e. `‖(e_1, …)‖ ≤ e_0`.
    pub fn add_second_order(&mut self, exprs: Vec<LinExpr>) {
        assert!(exprs.len() >= 2, "a second-order cone needs dimension >= 2");
        self.socs.push(exprs);
    }

    /// Bound a complex magnitude: `sqrt(w_re² + w_im²) ≤ x[z]` as one
    /// 3-dimensional second-order cone.
    pub fn lift_complex_magnitude(&mut self, w_re: usize, w_im: usize, z: usize) {
        self.add_second_order(vec![LinExpr::var(z), LinExpr::var(w_re), LinExpr::var(w_im)]);
    }

    /// Epigraph of a Hermitian PSD quadratic: adds `t` with
    /// `t ≥ ‖L^H w‖` where `R = L L^H`, returning the index of `t`.
    /// `w` lists the (Re, Im) index pairs of the complex vector.
    pub fn lift_quadratic(
        &mut self,
        r: &DMatrix<Complex64>,
        w: &[(usize, usize)],
    ) -> Result<usize> {
        if r.nrows() != w.len() {
            return Err(Error::Domain(format!(
                "quadratic lift: matrix is {}×{} but w has {} entries",
                r.nrows(),
                r.ncols(),
                w.len()
            )));
        }
        let factor = crate::linalg::psd_factor(r, 1e-14)?;
        let t = self.add_var();
        let mut exprs = vec![LinExpr::var(t)];
        exprs.extend(factor_rows_exprs(&factor, w));
        self.add_second_order(exprs);
        Ok(t)
    }

    /// Epigraph of a squared norm: adds `u` with `u ≥ Σ exprs²` through the
    /// standard cone `‖(exprs, (1−u)/2)‖ ≤ (1+u)/2`, returning `u`.
    pub fn lift_squared_norm(&mut self, exprs: Vec<LinExpr>) -> usize {
        let u = self.add_var();
        let mut block = Vec::with_capacity(exprs.len() + 2);
        block.push(LinExpr::term(u, 0.5).offset(0.5));
        block.push(LinExpr::term(u, -0.5).offset(0.5));
        block.extend(exprs);
        self.add_second_order(block);
        u
    }

    /// Total constraint-row count.
    fn num_rows(&self) -> usize {
        self.equalities.len() + self.nonneg.len() + self.socs.iter().map(Vec::len).sum::<usize>()
    }

    /// Assemble the `A x + s = b` data in cone order.
    fn assemble(&self) -> (CscMatrix<f64>, Vec<f64>) {
        let m = self.num_rows();
        let n = self.num_vars;
        let mut b = vec![0.0; m];
        // triplets per column for CSC assembly
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut row = 0usize;
        for (expr, rhs) in &self.equalities {
            // expr(x) = rhs  ⇔  s = (rhs − constant) − Σ c x ∈ {0}
            for &(i, c) in &expr.terms {
                cols[i].push((row, c));
            }
            b[row] = rhs - expr.constant;
            row += 1;
        }
        for expr in &self.nonneg {
            // expr(x) ≥ 0 ⇔ s = constant + Σ c x ≥ 0 ⇔ −Σ c x + s = constant
            for &(i, c) in &expr.terms {
                cols[i].push((row, -c));
            }
            b[row] = expr.constant;
            row += 1;
        }
        for soc in &self.socs {
            for expr in soc {
                for &(i, c) in &expr.terms {
                    cols[i].push((row, -c));
                }
                b[row] = expr.constant;
                row += 1;
            }
        }
        // merge duplicates and build CSC
        let mut colptr = Vec::with_capacity(n + 1);
        let mut rowval = Vec::new();
        let mut nzval = Vec::new();
        colptr.push(0);
        for col in cols.iter_mut() {
            col.sort_by_key(|&(r, _)| r);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(col.len());
            for &(r, v) in col.iter() {
                if let Some(last) = merged.last_mut() {
                    if last.0 == r {
                        last.1 += v;
                        continue;
                    }
                }
                merged.push((r, v));
            }
            for (r, v) in merged {
                if v != 0.0 {
                    rowval.push(r);
                    nzval.push(v);
                }
            }
            colptr.push(rowval.len());
        }
        (CscMatrix::new(m, n, colptr, rowval, nzval), b)
    }

    /// Solve with the interior-point backend. `MaxIter` signals
    /// non-convergence without raising; infeasibility and unboundedness are
    /// reported through the status. A numerical-error termination retries
    /// deterministically with stronger static KKT regularization before
    /// giving up, so reruns on the same problem stay bit-identical.
    pub fn solve(&self, tol: f64, max_iter: usize) -> Result<ConeSolution> {
        if self.num_vars == 0 {
            return Err(Error::Solver("problem has no variables".into()));
        }
        let (a, b) = self.assemble();
        let p = CscMatrix::<f64>::zeros((self.num_vars, self.num_vars));
        let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
        for block in self.cone_spec() {
            cones.push(match block {
                ConeBlock::Zero { dim } => SupportedConeT::ZeroConeT(dim),
                ConeBlock::NonNegative { dim } => SupportedConeT::NonnegativeConeT(dim),
                ConeBlock::SecondOrder { dim } => SupportedConeT::SecondOrderConeT(dim),
            });
        }
        for regularization in [1e-8, 1e-7, 1e-6] {
            let settings = DefaultSettingsBuilder::default()
                .verbose(std::env::var_os("RCAS_CONE_VERBOSE").is_some())
                .max_iter(max_iter as u32)
                .tol_gap_abs(tol)
                .tol_gap_rel(tol)
                .tol_feas(tol)
                .static_regularization_constant(regularization)
                .build()
                .map_err(|e| Error::Solver(format!("settings: {e}")))?;
            let mut solver = DefaultSolver::new(&p, &self.objective, &a, &b, &cones, settings);
            solver.solve();
            let status = match solver.solution.status {
                ClStatus::Solved => SolveStatus::Optimal,
                ClStatus::PrimalInfeasible | ClStatus::AlmostPrimalInfeasible => {
                    SolveStatus::Infeasible
                }
                ClStatus::DualInfeasible | ClStatus::AlmostDualInfeasible => {
                    SolveStatus::Unbounded
                }
                ClStatus::NumericalError => continue,
                _ => SolveStatus::MaxIter,
            };
            return Ok(ConeSolution {
                status,
                primal: solver.solution.x.clone(),
                dual: solver.solution.z.clone(),
                residuals: Residuals {
                    primal: solver.info.res_primal,
                    dual: solver.info.res_dual,
                    gap: solver.info.gap_abs,
                },
                iterations: solver.info.iterations as usize,
                objective: solver.solution.obj_val,
            });
        }
        Err(Error::Solver(
            "interior-point numerical error at every regularization level".into(),
        ))
    }

    /// Self-describing text dump for debugging. Field order: header, vars,
    /// objective terms (by variable), equalities (expr = rhs), nonnegative
    /// expressions, then second-order-cone blocks with dimensions. Affine
    /// expressions print as `constant + coeff*x[i] + …`.
    pub fn dump(&self) -> String {
        use std::fmt::Write as _;
        let fmt_expr = |expr: &LinExpr| {
            let mut s = format!("{}", expr.constant);
            for &(i, c) in &expr.terms {
                let _ = write!(s, " + {c}*x[{i}]");
            }
            s
        };
        let mut out = String::from("coneproblem v1\n");
        let _ = writeln!(out, "vars {}", self.num_vars);
        let _ = writeln!(out, "objective");
        for (i, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                let _ = writeln!(out, "  {c}*x[{i}]");
            }
        }
        let _ = writeln!(out, "equalities {}", self.equalities.len());
        for (expr, rhs) in &self.equalities {
            let _ = writeln!(out, "  {} = {rhs}", fmt_expr(expr));
        }
        let _ = writeln!(out, "nonnegative {}", self.nonneg.len());
        for expr in &self.nonneg {
            let _ = writeln!(out, "  {} >= 0", fmt_expr(expr));
        }
        let _ = writeln!(out, "soc {}", self.socs.len());
        for soc in &self.socs {
            let _ = writeln!(out, "  block dim {}", soc.len());
            for expr in soc {
                let _ = writeln!(out, "    {}", fmt_expr(expr));
            }
        }
        out
    }
}

/// Real/imaginary expressions of `F w` for a complex matrix F and complex
/// variable pairs `w`, interleaved (Re, Im) per row of F.
fn factor_rows_exprs(f: &DMatrix<Complex64>, w: &[(usize, usize)]) -> Vec<LinExpr> {
    let mut exprs = Vec::with_capacity(2 * f.nrows());
    for row in 0..f.nrows() {
        let mut re = LinExpr::default();
        let mut im = LinExpr::default();
        for (j, &(wr, wi)) in w.iter().enumerate() {
            let c = f[(row, j)];
            re.push(wr, c.re).push(wi, -c.im);
            im.push(wr, c.im).push(wi, c.re);
        }
        exprs.push(re);
        exprs.push(im);
    }
    exprs
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DVector;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn trivial_equality_lp() {
        let mut p = ConeProblem::new();
        let x = p.add_var();
        p.add_objective_term(x, 1.0);
        p.add_equality(LinExpr::var(x), 1.0);
        p.add_nonnegative(LinExpr::var(x));
        let sol = p.solve(DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_relative_eq!(sol.primal[x], 1.0, epsilon = 1e-7);
        assert!(sol.residuals.primal <= DEFAULT_TOL);
        assert!(sol.residuals.dual <= DEFAULT_TOL);
    }

    #[test]
    fn projection_onto_unit_ball() {
        // min t  s.t.  ‖x − (3,4)‖ ≤ t, ‖x‖ ≤ 1 → x = (0.6, 0.8), t = 4
        let mut p = ConeProblem::new();
        let x1 = p.add_var();
        let x2 = p.add_var();
        let t = p.add_var();
        p.add_objective_term(t, 1.0);
        p.add_second_order(vec![
            LinExpr::var(t),
            LinExpr::var(x1).offset(-3.0),
            LinExpr::var(x2).offset(-4.0),
        ]);
        p.add_second_order(vec![LinExpr::constant(1.0), LinExpr::var(x1), LinExpr::var(x2)]);
        let sol = p.solve(1e-9, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_relative_eq!(sol.primal[t], 4.0, epsilon = 1e-6);
        assert_relative_eq!(sol.primal[x1], 0.6, epsilon = 1e-6);
        assert_relative_eq!(sol.primal[x2], 0.8, epsilon = 1e-6);
    }

    #[test]
    fn magnitude_lift_boundary_and_infeasible() {
        // w fixed to 3+4j, minimize z → 5 on the cone boundary
        let mut p = ConeProblem::new();
        let (wr, wi) = p.add_complex_var();
        let z = p.add_var();
        p.add_objective_term(z, 1.0);
        p.add_equality(LinExpr::var(wr), 3.0);
        p.add_equality(LinExpr::var(wi), 4.0);
        p.lift_complex_magnitude(wr, wi, z);
        let sol = p.solve(1e-9, DEFAULT_MAX_ITER).unwrap();
        assert_relative_eq!(sol.primal[z], 5.0, epsilon = 1e-6);

        // w = 0: any nonnegative z feasible, minimum 0
        let mut p0 = ConeProblem::new();
        let (wr, wi) = p0.add_complex_var();
        let z = p0.add_var();
        p0.add_objective_term(z, 1.0);
        p0.add_equality(LinExpr::var(wr), 0.0);
        p0.add_equality(LinExpr::var(wi), 0.0);
        p0.lift_complex_magnitude(wr, wi, z);
        let sol0 = p0.solve(1e-9, DEFAULT_MAX_ITER).unwrap();
        assert!(sol0.primal[z].abs() < 1e-6);

        // |1| ≤ 0.5 is infeasible
        let mut pi = ConeProblem::new();
        let (wr, wi) = pi.add_complex_var();
        let z = pi.add_var();
        pi.add_objective_term(wr, 1.0);
        pi.add_equality(LinExpr::var(wr), 1.0);
        pi.add_equality(LinExpr::var(wi), 0.0);
        pi.add_equality(LinExpr::var(z), 0.5);
        pi.lift_complex_magnitude(wr, wi, z);
        let soli = pi.solve(1e-9, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(soli.status, SolveStatus::Infeasible);
    }

    fn fix_complex(p: &mut ConeProblem, pair: (usize, usize), v: Complex64) {
        p.add_equality(LinExpr::var(pair.0), v.re);
        p.add_equality(LinExpr::var(pair.1), v.im);
    }

    #[test]
    fn quadratic_lift_identity_and_rank_one() {
        // R = I: t ≥ ‖w‖
        let mut p = ConeProblem::new();
        let w: Vec<_> = (0..3).map(|_| p.add_complex_var()).collect();
        let r = DMatrix::<Complex64>::identity(3, 3);
        let t = p.lift_quadratic(&r, &w).unwrap();
        p.add_objective_term(t, 1.0);
        let vals = [
            Complex64::new(1.0, 2.0),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.0, -1.5),
        ];
        for (pair, v) in w.iter().zip(vals.iter()) {
            fix_complex(&mut p, *pair, *v);
        }
        let sol = p.solve(1e-9, DEFAULT_MAX_ITER).unwrap();
        let norm = vals.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert_relative_eq!(sol.primal[t], norm, epsilon = 1e-6);

        // rank-1 R = aa^H: t ≥ |a^H w|
        let a = DVector::from_vec(vec![
            Complex64::new(1.0, 0.5),
            Complex64::new(0.0, -1.0),
            Complex64::new(2.0, 0.0),
        ]);
        let r1 = &a * a.adjoint();
        let mut p1 = ConeProblem::new();
        let w1: Vec<_> = (0..3).map(|_| p1.add_complex_var()).collect();
        let t1 = p1.lift_quadratic(&r1, &w1).unwrap();
        p1.add_objective_term(t1, 1.0);
        for (pair, v) in w1.iter().zip(vals.iter()) {
            fix_complex(&mut p1, *pair, *v);
        }
        let sol1 = p1.solve(1e-9, DEFAULT_MAX_ITER).unwrap();
        let inner = a
            .iter()
            .zip(vals.iter())
            .map(|(ai, vi)| ai.conj() * vi)
            .sum::<Complex64>()
            .norm();
        assert_relative_eq!(sol1.primal[t1], inner, epsilon = 1e-6);
    }

    #[test]
    fn quadratic_lift_matches_eigen_evaluation() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..10 {
            let n = 4;
            let g = DMatrix::<Complex64>::from_fn(n, n, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let r = &g * g.adjoint();
            let vals: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let mut p = ConeProblem::new();
            let w: Vec<_> = (0..n).map(|_| p.add_complex_var()).collect();
            let t = p.lift_quadratic(&r, &w).unwrap();
            p.add_objective_term(t, 1.0);
            for (pair, v) in w.iter().zip(vals.iter()) {
                fix_complex(&mut p, *pair, *v);
            }
            let sol = p.solve(1e-10, DEFAULT_MAX_ITER).unwrap();
            let wv = DVector::from_vec(vals.clone());
            let direct = wv.dotc(&(&r * &wv)).re;
            assert!(
                (sol.primal[t].powi(2) - direct).abs() <= 1e-8 * direct.max(1.0),
                "t² = {} vs w^H R w = {direct}",
                sol.primal[t].powi(2)
            );
        }
    }

    #[test]
    fn squared_norm_lift() {
        // min u s.t. u ≥ (x−1)² + (x+2)² → x = −0.5, u = 4.5
        let mut p = ConeProblem::new();
        let x = p.add_var();
        let u = p.lift_squared_norm(vec![
            LinExpr::var(x).offset(-1.0),
            LinExpr::var(x).offset(2.0),
        ]);
        p.add_objective_term(u, 1.0);
        let sol = p.solve(1e-9, DEFAULT_MAX_ITER).unwrap();
        assert_relative_eq!(sol.primal[x], -0.5, epsilon = 1e-6);
        assert_relative_eq!(sol.primal[u], 4.5, epsilon = 1e-6);
    }

    #[test]
    fn reruns_are_bit_identical() {
        let mut p = ConeProblem::new();
        let x1 = p.add_var();
        let x2 = p.add_var();
        let t = p.add_var();
        p.add_objective_term(t, 1.0);
        p.add_objective_term(x1, 0.3);
        p.add_equality(
            {
                let mut e = LinExpr::var(x1);
                e.push(x2, 2.0);
                e
            },
            1.0,
        );
        p.add_second_order(vec![LinExpr::var(t), LinExpr::var(x1), LinExpr::var(x2)]);
        let s1 = p.solve(DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let s2 = p.solve(DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(s1.iterations, s2.iterations);
        assert_eq!(s1.primal, s2.primal);
        assert_eq!(s1.dual, s2.dual);
    }

    #[test]
    fn weak_duality_on_random_instances() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.gen_range(2..5);
            let mut p = ConeProblem::new();
            let xs: Vec<_> = (0..n).map(|_| p.add_var()).collect();
            for &x in &xs {
                p.add_objective_term(x, rng.gen_range(-1.0..1.0));
                p.add_nonnegative(LinExpr::var(x).offset(rng.gen_range(0.0..1.0)));
                p.add_nonnegative(LinExpr::term(x, -1.0).offset(rng.gen_range(1.0..2.0)));
            }
            let sol = p.solve(1e-8, DEFAULT_MAX_ITER).unwrap();
            assert_eq!(sol.status, SolveStatus::Optimal);
            // at optimality the duality gap residual is below tolerance
            assert!(sol.residuals.gap <= 1e-6);
        }
    }

    #[test]
    fn dump_is_self_describing() {
        let mut p = ConeProblem::new();
        let x = p.add_var();
        let y = p.add_var();
        p.add_objective_term(x, 2.0);
        p.add_equality(LinExpr::var(y).offset(1.0), 3.0);
        p.add_nonnegative(LinExpr::var(x));
        p.add_second_order(vec![LinExpr::constant(1.0), LinExpr::var(x), LinExpr::var(y)]);
        let d = p.dump();
        assert!(d.starts_with("coneproblem v1\nvars 2\n"));
        assert!(d.contains("2*x[0]"));
        assert!(d.contains("equalities 1"));
        assert!(d.contains("1 + 1*x[1] = 3"));
        assert!(d.contains("nonnegative 1"));
        assert!(d.contains("soc 1"));
        assert!(d.contains("block dim 3"));
    }
}
