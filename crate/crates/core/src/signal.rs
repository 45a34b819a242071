//! Scenario description and the narrowband signal environment: theoretical
//! covariances, seeded snapshot synthesis (optionally with correlated
//! interferers), switched-array data collection, and output-SINR evaluation.
//!
//! Snapshots follow the standard model `y = a(θ0) s + B g + n` with all
//! sources circular complex Gaussian and i.i.d. across time; interference
//! correlation is injected through a Hermitian square root of the unit-
//! diagonal correlation matrix.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::array::ArrayGeometry;
use crate::linalg;
use crate::{Error, Result};

/// One directional interferer with linear power.
#[derive(Debug, Clone, PartialEq)]
pub struct Interference {
    pub angle_deg: f64,
    pub power: f64,
}

/// Signal environment: desired source, interferers, noise power, and an
/// optional interference correlation matrix (Hermitian PSD, unit diagonal).
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    source_angle_deg: f64,
    source_power: f64,
    interferences: Vec<Interference>,
    noise_power: f64,
    correlation: Option<DMatrix<Complex64>>,
}

impl Scenario {
    pub fn new(
        source_angle_deg: f64,
        source_power: f64,
        interferences: Vec<Interference>,
        noise_power: f64,
    ) -> Result<Self> {
        if !(source_power > 0.0) || !(noise_power > 0.0) {
            return Err(Error::Domain(
                "source and noise powers must be positive".into(),
            ));
        }
        if let Some(j) = interferences.iter().find(|j| !(j.power > 0.0)) {
            return Err(Error::Domain(format!(
                "interference power must be positive, got {}",
                j.power
            )));
        }
        Ok(Self {
            source_angle_deg,
            source_power,
            interferences,
            noise_power,
            correlation: None,
        })
    }

    /// Attach an interference correlation matrix (J×J, Hermitian PSD with
    /// unit diagonal).
    pub fn with_correlation(mut self, c: DMatrix<Complex64>) -> Result<Self> {
        let j = self.interferences.len();
        if c.shape() != (j, j) {
            return Err(Error::Domain(format!(
                "correlation must be {j}×{j}, got {:?}",
                c.shape()
            )));
        }
        let herm_err = (&c - c.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
        if herm_err > 1e-10 {
            return Err(Error::Domain("correlation must be Hermitian".into()));
        }
        for i in 0..j {
            if (c[(i, i)] - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
                return Err(Error::Domain("correlation diagonal must be ones".into()));
            }
        }
        let (min, max) = linalg::eigen_extrema(&c);
        if min < -1e-10 * max.max(1.0) {
            return Err(Error::Domain(format!(
                "correlation must be PSD (min eigenvalue {min:.3e})"
            )));
        }
        self.correlation = Some(c);
        Ok(self)
    }

    /// Random unit-diagonal Hermitian PSD correlation matrix:
    /// `C = D^{-1/2} (G G^H + I) D^{-1/2}` with G complex Gaussian and D the
    /// diagonal of the bracketed matrix.
    pub fn random_correlation(j: usize, seed: u64) -> DMatrix<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::<Complex64>::from_fn(j, j, |_, _| complex_gaussian(&mut rng, 1.0));
        let m = &g * g.adjoint() + DMatrix::<Complex64>::identity(j, j);
        let mut c = m.clone();
        for a in 0..j {
            for b in 0..j {
                let scale = (m[(a, a)].re * m[(b, b)].re).sqrt();
                c[(a, b)] /= Complex64::new(scale, 0.0);
            }
        }
        // exact unit diagonal
        for a in 0..j {
            c[(a, a)] = Complex64::new(1.0, 0.0);
        }
        c
    }

    pub fn source_angle_deg(&self) -> f64 {
        self.source_angle_deg
    }

    pub fn source_power(&self) -> f64 {
        self.source_power
    }

    pub fn interferences(&self) -> &[Interference] {
        &self.interferences
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn correlation(&self) -> Option<&DMatrix<Complex64>> {
        self.correlation.as_ref()
    }
}

/// Origin of a covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceKind {
    Theoretical,
    Sample,
    Augmented,
}

/// Hermitian PSD covariance with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    matrix: DMatrix<Complex64>,
    kind: CovarianceKind,
}

impl CovarianceEstimate {
    /// Validating constructor: the matrix must be Hermitian to machine
    /// precision and have no eigenvalue below `-1e-10 * λ_max`.
    pub fn new(matrix: DMatrix<Complex64>, kind: CovarianceKind) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Domain("covariance must be square".into()));
        }
        let herm_err = (&matrix - matrix.adjoint())
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        let scale = matrix.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
        if herm_err > 1e-10 * scale {
            return Err(Error::Domain(format!(
                "covariance is not Hermitian (asymmetry {herm_err:.3e})"
            )));
        }
        let (min, max) = linalg::eigen_extrema(&matrix);
        if min < -1e-10 * max.max(1.0) {
            return Err(Error::Domain(format!(
                "covariance is not PSD (min eigenvalue {min:.3e})"
            )));
        }
        Ok(Self { matrix, kind })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn kind(&self) -> CovarianceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Restriction to the given antenna indices. A principal submatrix of a
    /// Hermitian PSD matrix stays Hermitian PSD, so no re-validation is done.
    pub fn restricted(&self, keep: &[usize]) -> Self {
        let k = keep.len();
        let mut m = DMatrix::<Complex64>::zeros(k, k);
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                m[(a, b)] = self.matrix[(i, j)];
            }
        }
        Self {
            matrix: m,
            kind: self.kind,
        }
    }
}

/// Interference amplitude mixing matrix `A_J diag(σ_j) C^{1/2}` (N×J).
fn interference_mixing(sc: &Scenario, geom: &ArrayGeometry) -> Result<DMatrix<Complex64>> {
    let n = geom.num_antennas();
    let j = sc.interferences.len();
    let mut aj = DMatrix::<Complex64>::zeros(n, j);
    for (col, itf) in sc.interferences.iter().enumerate() {
        aj.set_column(col, &geom.steering_vector(itf.angle_deg)?);
    }
    for (col, itf) in sc.interferences.iter().enumerate() {
        let s = itf.power.sqrt();
        for row in 0..n {
            aj[(row, col)] *= Complex64::new(s, 0.0);
        }
    }
    match &sc.correlation {
        None => Ok(aj),
        Some(c) => {
            let root = linalg::hermitian_sqrt(c, 1e-9)?;
            Ok(aj * root)
        }
    }
}

/// Interference-plus-noise part of the theoretical covariance.
pub fn interference_noise_covariance(
    sc: &Scenario,
    geom: &ArrayGeometry,
) -> Result<DMatrix<Complex64>> {
    let n = geom.num_antennas();
    let b = interference_mixing(sc, geom)?;
    let mut r = &b * b.adjoint();
    for i in 0..n {
        r[(i, i)] += Complex64::new(sc.noise_power, 0.0);
    }
    Ok(linalg::hermitian_part(&r))
}

/// Theoretical covariance
/// `R = σ_s² a a^H + A_J diag(σ_j) C diag(σ_j) A_J^H + σ_n² I`
/// (C = I when no correlation is attached).
pub fn theoretical_covariance(sc: &Scenario, geom: &ArrayGeometry) -> Result<CovarianceEstimate> {
    let a = geom.steering_vector(sc.source_angle_deg)?;
    let mut r = interference_noise_covariance(sc, geom)?;
    let src = &a * a.adjoint() * Complex64::new(sc.source_power, 0.0);
    r += src;
    CovarianceEstimate::new(linalg::hermitian_part(&r), CovarianceKind::Theoretical)
}

/// Block of array snapshots with a per-sample active-antenna mask.
/// Masked-off entries are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotBlock {
    data: DMatrix<Complex64>,
    active: Vec<bool>, // column-major N×T
}

impl SnapshotBlock {
    pub fn data(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn num_antennas(&self) -> usize {
        self.data.nrows()
    }

    pub fn sample_count(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_active(&self, antenna: usize, sample: usize) -> bool {
        self.active[sample * self.data.nrows() + antenna]
    }

    /// Concatenate blocks along time.
    pub fn concat(blocks: &[SnapshotBlock]) -> Result<SnapshotBlock> {
        let n = blocks
            .first()
            .ok_or_else(|| Error::Domain("no blocks to concatenate".into()))?
            .num_antennas();
        if blocks.iter().any(|b| b.num_antennas() != n) {
            return Err(Error::Domain("blocks have different antenna counts".into()));
        }
        let t: usize = blocks.iter().map(|b| b.sample_count()).sum();
        let mut data = DMatrix::<Complex64>::zeros(n, t);
        let mut active = Vec::with_capacity(n * t);
        let mut col = 0;
        for b in blocks {
            for j in 0..b.sample_count() {
                data.set_column(col, &b.data.column(j).into_owned());
                col += 1;
            }
            active.extend_from_slice(&b.active);
        }
        Ok(SnapshotBlock { data, active })
    }

    /// Pair-normalized sample covariance: entry (i, j) averages
    /// `y_i ȳ_j` over the samples where both antennas were active; entries
    /// with no co-activation are left at zero.
    pub fn sample_covariance(&self) -> Result<CovarianceEstimate> {
        let n = self.num_antennas();
        let t = self.sample_count();
        let mut accum = DMatrix::<Complex64>::zeros(n, n);
        let mut counts = DMatrix::<u64>::zeros(n, n);
        for s in 0..t {
            let col = self.data.column(s);
            for i in 0..n {
                if !self.is_active(i, s) {
                    continue;
                }
                for j in 0..n {
                    if !self.is_active(j, s) {
                        continue;
                    }
                    accum[(i, j)] += col[i] * col[j].conj();
                    counts[(i, j)] += 1;
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if counts[(i, j)] > 0 {
                    accum[(i, j)] /= Complex64::new(counts[(i, j)] as f64, 0.0);
                } else {
                    accum[(i, j)] = Complex64::new(0.0, 0.0);
                }
            }
        }
        CovarianceEstimate::new(linalg::hermitian_part(&accum), CovarianceKind::Sample)
    }
}

fn complex_gaussian(rng: &mut ChaCha8Rng, power: f64) -> Complex64 {
    let s = (power / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// Raw full-array samples for one window. Order of draws is fixed (source,
/// then interference, then noise, each column-major) so a seed pins the data.
fn raw_window(
    sc: &Scenario,
    geom: &ArrayGeometry,
    t: usize,
    rng: &mut ChaCha8Rng,
) -> Result<DMatrix<Complex64>> {
    let n = geom.num_antennas();
    let a = geom.steering_vector(sc.source_angle_deg)?;
    let mixing = interference_mixing(sc, geom)?;
    let j = sc.interferences.len();

    let mut data = DMatrix::<Complex64>::zeros(n, t);
    for s in 0..t {
        let amp = complex_gaussian(rng, sc.source_power);
        for i in 0..n {
            data[(i, s)] = a[i] * amp;
        }
    }
    if j > 0 {
        let g = DMatrix::<Complex64>::from_fn(j, t, |_, _| complex_gaussian(rng, 1.0));
        data += &mixing * g;
    }
    for s in 0..t {
        for i in 0..n {
            data[(i, s)] += complex_gaussian(rng, sc.noise_power);
        }
    }
    Ok(data)
}

/// Synthesize `t` full-array snapshots; deterministic for a fixed seed.
pub fn synthesize_snapshots(
    sc: &Scenario,
    geom: &ArrayGeometry,
    t: usize,
    seed: u64,
) -> Result<SnapshotBlock> {
    if t == 0 {
        return Err(Error::Domain("sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = raw_window(sc, geom, t, &mut rng)?;
    let active = vec![true; geom.num_antennas() * t];
    Ok(SnapshotBlock { data, active })
}

fn check_complementary(arrays: &[Vec<usize>], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for arr in arrays {
        for &i in arr {
            if i >= n {
                return Err(Error::Domain(format!("antenna index {i} out of range")));
            }
            if seen[i] {
                return Err(Error::Domain(format!(
                    "arrays are not disjoint: antenna {i} appears twice"
                )));
            }
            seen[i] = true;
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(Error::Domain(
            "arrays do not jointly cover the full aperture".into(),
        ));
    }
    Ok(())
}

/// Synthesize `t` snapshots with only the antennas in `active` switched on;
/// masked-off rows are exactly zero.
pub fn masked_snapshots(
    sc: &Scenario,
    geom: &ArrayGeometry,
    t: usize,
    seed: u64,
    active: &[usize],
) -> Result<SnapshotBlock> {
    let n = geom.num_antennas();
    if t == 0 {
        return Err(Error::Domain("sample count must be at least 1".into()));
    }
    let mut mask = vec![false; n];
    for &i in active {
        if i >= n {
            return Err(Error::Domain(format!("antenna index {i} out of range")));
        }
        mask[i] = true;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = raw_window(sc, geom, t, &mut rng)?;
    for s in 0..t {
        for i in 0..n {
            if !mask[i] {
                data[(i, s)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    let mut active_flags = Vec::with_capacity(n * t);
    for _ in 0..t {
        active_flags.extend_from_slice(&mask);
    }
    Ok(SnapshotBlock {
        data,
        active: active_flags,
    })
}

/// Sequentially simulate each sparse array active for `t_per_array` samples
/// and assemble the stacked block plus the pair-normalized full-array
/// covariance. The arrays must be disjoint and jointly cover the aperture.
pub fn switched_collection(
    arrays: &[Vec<usize>],
    sc: &Scenario,
    geom: &ArrayGeometry,
    t_per_array: usize,
    seed: u64,
) -> Result<(SnapshotBlock, CovarianceEstimate)> {
    let n = geom.num_antennas();
    check_complementary(arrays, n)?;
    if t_per_array == 0 {
        return Err(Error::Domain("sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut blocks = Vec::with_capacity(arrays.len());
    for arr in arrays {
        let mut data = raw_window(sc, geom, t_per_array, &mut rng)?;
        let mut mask = vec![false; n];
        for &i in arr {
            mask[i] = true;
        }
        for s in 0..t_per_array {
            for i in 0..n {
                if !mask[i] {
                    data[(i, s)] = Complex64::new(0.0, 0.0);
                }
            }
        }
        let mut active = Vec::with_capacity(n * t_per_array);
        for _ in 0..t_per_array {
            active.extend_from_slice(&mask);
        }
        blocks.push(SnapshotBlock { data, active });
    }
    let stacked = SnapshotBlock::concat(&blocks)?;
    let cov = stacked.sample_covariance()?;
    Ok((stacked, cov))
}

/// Output SINR in dB of weights `w` under the scenario:
/// `10 log10( σ_s² |w^H a(θ0)|² / (w^H R_in w) )`.
pub fn output_sinr(w: &DVector<Complex64>, sc: &Scenario, geom: &ArrayGeometry) -> Result<f64> {
    if w.iter().all(|v| v.norm() == 0.0) {
        return Err(Error::Domain("weight vector must be non-zero".into()));
    }
    if w.len() != geom.num_antennas() {
        return Err(Error::Domain(format!(
            "weight length {} does not match array size {}",
            w.len(),
            geom.num_antennas()
        )));
    }
    let a = geom.steering_vector(sc.source_angle_deg)?;
    let r_in = interference_noise_covariance(sc, geom)?;
    let gain = w.dotc(&a).norm_sqr();
    let denom = w.dotc(&(&r_in * w)).re;
    Ok(crate::power_to_db(sc.source_power * gain / denom))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small_scenario() -> Scenario {
        // four interferers at 20 dB INR over unit noise
        let inr = crate::db_to_power(20.0);
        Scenario::new(
            0.0,
            1.0,
            [-28.0, -12.0, 10.0, 25.0]
                .iter()
                .map(|&a| Interference {
                    angle_deg: a,
                    power: inr,
                })
                .collect(),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn covariance_noise_only_is_identity() {
        let sc = Scenario::new(0.0, 1e-12, vec![], 1.0).unwrap();
        let geom = ArrayGeometry::ula(6, 0.25, 0.0).unwrap();
        let r = interference_noise_covariance(&sc, &geom).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(r[(i, j)].re, expect, epsilon = 1e-12);
                assert!(r[(i, j)].im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn covariance_diagonal_is_total_power() {
        let sc = small_scenario();
        let geom = ArrayGeometry::ula(16, 0.25, 0.0).unwrap();
        let r = theoretical_covariance(&sc, &geom).unwrap();
        let total = 1.0 + 4.0 * crate::db_to_power(20.0) + 1.0;
        for i in 0..16 {
            assert_relative_eq!(r.matrix()[(i, i)].re, total, max_relative = 1e-12);
        }
    }

    #[test]
    fn covariance_interference_block_has_rank_four() {
        let sc = small_scenario();
        let geom = ArrayGeometry::ula(16, 0.25, 0.0).unwrap();
        let r = theoretical_covariance(&sc, &geom).unwrap();
        let a = geom.steer_vector();
        let mut block = r.matrix().clone();
        block -= &a * a.adjoint() * Complex64::new(sc.source_power(), 0.0);
        for i in 0..16 {
            block[(i, i)] -= Complex64::new(sc.noise_power(), 0.0);
        }
        let eig = block.symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!(vals[3] > 1.0, "fourth eigenvalue {}", vals[3]);
        assert!(
            vals[4].abs() < 1e-8 * vals[0],
            "fifth eigenvalue {} not negligible vs {}",
            vals[4],
            vals[0]
        );
    }

    #[test]
    fn snapshots_are_deterministic_and_fully_masked() {
        let sc = small_scenario();
        let geom = ArrayGeometry::ula(8, 0.25, 0.0).unwrap();
        let b1 = synthesize_snapshots(&sc, &geom, 32, 99).unwrap();
        let b2 = synthesize_snapshots(&sc, &geom, 32, 99).unwrap();
        assert_eq!(b1, b2);
        let one = synthesize_snapshots(&sc, &geom, 1, 3).unwrap();
        assert_eq!(one.sample_count(), 1);
        assert!((0..8).all(|i| one.is_active(i, 0)));
    }

    #[test]
    fn sample_covariance_converges_to_theoretical() {
        let sc = small_scenario();
        let geom = ArrayGeometry::ula(16, 0.25, 0.0).unwrap();
        let truth = theoretical_covariance(&sc, &geom).unwrap();
        let block = synthesize_snapshots(&sc, &geom, 100_000, 1234).unwrap();
        let est = block.sample_covariance().unwrap();
        let err = (est.matrix() - truth.matrix()).norm() / truth.matrix().norm();
        assert!(err < 0.05, "relative Frobenius error {err}");
    }

    #[test]
    fn sample_covariance_error_decreases_with_t() {
        let sc = small_scenario();
        let geom = ArrayGeometry::ula(8, 0.25, 0.0).unwrap();
        let truth = theoretical_covariance(&sc, &geom).unwrap();
        let mut means = Vec::new();
        for &t in &[100usize, 1000, 10_000] {
            let mut total = 0.0;
            for seed in 0..5u64 {
                let block = synthesize_snapshots(&sc, &geom, t, 1000 + seed).unwrap();
                let est = block.sample_covariance().unwrap();
                total += (est.matrix() - truth.matrix()).norm() / truth.matrix().norm();
            }
            means.push(total / 5.0);
        }
        assert!(means[0] > means[1] && means[1] > means[2], "errors {means:?}");
    }

    #[test]
    fn correlated_snapshots_match_correlated_covariance() {
        let inr = crate::db_to_power(10.0);
        let sc = Scenario::new(
            0.0,
            1.0,
            vec![
                Interference { angle_deg: -20.0, power: inr },
                Interference { angle_deg: 15.0, power: inr },
                Interference { angle_deg: 40.0, power: inr },
            ],
            1.0,
        )
        .unwrap()
        .with_correlation(Scenario::random_correlation(3, 7))
        .unwrap();
        let geom = ArrayGeometry::ula(8, 0.25, 0.0).unwrap();
        let truth = theoretical_covariance(&sc, &geom).unwrap();
        let block = synthesize_snapshots(&sc, &geom, 200_000, 5).unwrap();
        let est = block.sample_covariance().unwrap();
        let err = (est.matrix() - truth.matrix()).norm() / truth.matrix().norm();
        assert!(err < 0.05, "relative Frobenius error {err}");
    }

    #[test]
    fn random_correlation_is_valid() {
        for seed in 0..5 {
            let c = Scenario::random_correlation(4, seed);
            for i in 0..4 {
                assert_relative_eq!(c[(i, i)].re, 1.0, epsilon = 1e-12);
            }
            let (min, _) = crate::linalg::eigen_extrema(&c);
            assert!(min >= -1e-12);
        }
    }

    #[test]
    fn switched_single_array_reduces_to_plain_covariance() {
        let sc = small_scenario();
        let geom = ArrayGeometry::ula(8, 0.25, 0.0).unwrap();
        let full: Vec<usize> = (0..8).collect();
        let (block, cov) = switched_collection(&[full], &sc, &geom, 500, 11).unwrap();
        let plain = block.sample_covariance().unwrap();
        assert_eq!(cov.matrix(), plain.matrix());
        // and equals (1/T) Y Y^H since every antenna is always active
        let direct = block.data() * block.data().adjoint() / Complex64::new(500.0, 0.0);
        assert!((cov.matrix() - &direct).norm() < 1e-10);
    }

    #[test]
    fn switched_complementary_pair_masks_and_counts() {
        let sc = small_scenario();
        let geom = ArrayGeometry::ula(16, 0.25, 0.0).unwrap();
        let a: Vec<usize> = (0..16).step_by(2).collect();
        let b: Vec<usize> = (1..16).step_by(2).collect();
        let (block, cov) = switched_collection(&[a.clone(), b.clone()], &sc, &geom, 500, 11).unwrap();
        assert_eq!(block.sample_count(), 1000);
        // masked-off entries are exactly zero
        for s in 0..500 {
            for &i in &b {
                assert_eq!(block.data()[(i, s)], Complex64::new(0.0, 0.0));
                assert!(!block.is_active(i, s));
            }
        }
        // cross-array entries carry no co-activation and are zero-filled
        for &i in &a {
            for &j in &b {
                assert_eq!(cov.matrix()[(i, j)], Complex64::new(0.0, 0.0));
            }
        }
        // diagonal estimated from exactly T samples: matches the per-window
        // average of |y_i|^2
        let mut diag0 = 0.0;
        for s in 0..500 {
            diag0 += block.data()[(0, s)].norm_sqr();
        }
        assert_relative_eq!(cov.matrix()[(0, 0)].re, diag0 / 500.0, max_relative = 1e-12);
        assert!(switched_collection(&[a], &sc, &geom, 10, 0).is_err());
    }

    #[test]
    fn output_sinr_matched_filter_gain() {
        let sc = Scenario::new(0.0, 1.0, vec![], 1.0).unwrap();
        let geom = ArrayGeometry::ula(8, 0.25, 0.0).unwrap();
        let a = geom.steer_vector();
        let w = a.clone() / Complex64::new(8.0, 0.0);
        let sinr = output_sinr(&w, &sc, &geom).unwrap();
        assert_relative_eq!(sinr, 10.0 * 8.0f64.log10(), max_relative = 1e-12);
    }

    #[test]
    fn output_sinr_scale_invariant() {
        let sc = small_scenario();
        let geom = ArrayGeometry::ula(8, 0.25, 0.0).unwrap();
        let mut w = geom.steer_vector();
        w[3] += Complex64::new(0.2, -0.4);
        let s1 = output_sinr(&w, &sc, &geom).unwrap();
        let s2 = output_sinr(&(w * Complex64::new(-2.5, 1.7)), &sc, &geom).unwrap();
        assert_relative_eq!(s1, s2, epsilon = 1e-10);
    }
}
