//! Array geometry, steering vectors, the sidelobe manifold, and the
//! contiguous group structure used by the antenna-switching designs.
//!
//! Angles are degrees from broadside at every API boundary and are converted
//! to radians in exactly one place ([`deg_to_rad`]). Positions are integer
//! grid indices scaled by a single inter-element spacing in wavelengths, so a
//! steering-vector entry is `exp(j 2π (d/λ) x_n sin θ)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

/// The one degrees→radians chokepoint.
#[inline]
pub fn deg_to_rad(deg: f64) -> f64 {
    deg * std::f64::consts::PI / 180.0
}

/// Linear array geometry on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    positions: Vec<i64>,
    spacing: f64,
    steer_angle_deg: f64,
}

impl ArrayGeometry {
    /// Geometry from explicit grid positions.
    pub fn new(positions: Vec<i64>, spacing: f64, steer_angle_deg: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::Config("array needs at least one antenna".into()));
        }
        if !positions.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config(
                "antenna positions must be strictly increasing".into(),
            ));
        }
        if !(spacing > 0.0) {
            return Err(Error::Config(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        if !(steer_angle_deg > -90.0 && steer_angle_deg < 90.0) {
            return Err(Error::Config(format!(
                "steer angle must lie in (-90, 90) degrees, got {steer_angle_deg}"
            )));
        }
        Ok(Self {
            positions,
            spacing,
            steer_angle_deg,
        })
    }

    /// Uniform linear array with positions `0..n`.
    pub fn ula(n: usize, spacing: f64, steer_angle_deg: f64) -> Result<Self> {
        Self::new((0..n as i64).collect(), spacing, steer_angle_deg)
    }

    pub fn num_antennas(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn steer_angle_deg(&self) -> f64 {
        self.steer_angle_deg
    }

    /// Geometry restricted to the antennas at the given indices.
    pub fn subarray(&self, keep: &[usize]) -> Result<Self> {
        let mut positions = Vec::with_capacity(keep.len());
        for &i in keep {
            let p = *self
                .positions
                .get(i)
                .ok_or_else(|| Error::Config(format!("antenna index {i} out of range")))?;
            positions.push(p);
        }
        Self::new(positions, self.spacing, self.steer_angle_deg)
    }

    /// Steering vector toward `theta_deg`; entry n is
    /// `exp(j 2π (d/λ) x_n sin θ)`.
    pub fn steering_vector(&self, theta_deg: f64) -> Result<DVector<Complex64>> {
        if !(-90.0..=90.0).contains(&theta_deg) {
            return Err(Error::Domain(format!(
                "steering angle {theta_deg} outside [-90, 90] degrees"
            )));
        }
        let s = deg_to_rad(theta_deg).sin();
        let k = 2.0 * std::f64::consts::PI * self.spacing * s;
        Ok(DVector::from_iterator(
            self.positions.len(),
            self.positions
                .iter()
                .map(|&x| Complex64::from_polar(1.0, k * x as f64)),
        ))
    }

    /// Steering vector toward the declared steer angle.
    pub fn steer_vector(&self) -> DVector<Complex64> {
        self.steering_vector(self.steer_angle_deg)
            .expect("steer angle validated at construction")
    }

    /// Manifold matrix over the sidelobe angles of `grid`: column k is the
    /// steering vector at the k-th sidelobe angle.
    pub fn manifold_matrix(&self, grid: &AngleGrid) -> Result<DMatrix<Complex64>> {
        let angles = grid.sidelobe_angles();
        if angles.is_empty() {
            return Err(Error::Domain("grid has no sidelobe angles".into()));
        }
        let n = self.num_antennas();
        let mut m = DMatrix::<Complex64>::zeros(n, angles.len());
        for (k, &theta) in angles.iter().enumerate() {
            m.set_column(k, &self.steering_vector(theta)?);
        }
        Ok(m)
    }
}

/// Evaluation grid with a mask marking the sidelobe region Ω_s.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleGrid {
    angles_deg: Vec<f64>,
    sidelobe_mask: Vec<bool>,
}

impl AngleGrid {
    /// Grid from explicit angles and mask.
    pub fn new(angles_deg: Vec<f64>, sidelobe_mask: Vec<bool>) -> Result<Self> {
        if angles_deg.len() != sidelobe_mask.len() {
            return Err(Error::Config("angle/mask length mismatch".into()));
        }
        if angles_deg.is_empty() {
            return Err(Error::Config("grid must be non-empty".into()));
        }
        if !angles_deg.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config("grid angles must be strictly increasing".into()));
        }
        if angles_deg[0] < -90.0 || *angles_deg.last().unwrap() > 90.0 {
            return Err(Error::Config("grid angles must lie in [-90, 90]".into()));
        }
        Ok(Self {
            angles_deg,
            sidelobe_mask,
        })
    }

    /// Uniform grid over [-90°, 90°] with the given step; the mask marks
    /// angles falling inside any of the `sidelobe_regions` intervals
    /// (inclusive endpoints).
    pub fn from_sidelobe_regions(step_deg: f64, sidelobe_regions: &[(f64, f64)]) -> Result<Self> {
        if !(step_deg > 0.0) {
            return Err(Error::Config(format!(
                "grid step must be positive, got {step_deg}"
            )));
        }
        for &(lo, hi) in sidelobe_regions {
            if lo >= hi || lo < -90.0 || hi > 90.0 {
                return Err(Error::Config(format!(
                    "bad sidelobe region [{lo}, {hi}]"
                )));
            }
        }
        let count = ((180.0 / step_deg).round() as usize) + 1;
        let mut angles = Vec::with_capacity(count);
        let mut mask = Vec::with_capacity(count);
        for i in 0..count {
            let theta = (-90.0 + i as f64 * step_deg).min(90.0);
            let eps = 1e-9;
            let inside = sidelobe_regions
                .iter()
                .any(|&(lo, hi)| theta >= lo - eps && theta <= hi + eps);
            angles.push(theta);
            mask.push(inside);
        }
        Self::new(angles, mask)
    }

    pub fn len(&self) -> usize {
        self.angles_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles_deg.is_empty()
    }

    pub fn angles_deg(&self) -> &[f64] {
        &self.angles_deg
    }

    pub fn sidelobe_mask(&self) -> &[bool] {
        &self.sidelobe_mask
    }

    /// Angles inside Ω_s, in grid order.
    pub fn sidelobe_angles(&self) -> Vec<f64> {
        self.angles_deg
            .iter()
            .zip(&self.sidelobe_mask)
            .filter(|(_, &m)| m)
            .map(|(&a, _)| a)
            .collect()
    }

    /// Number of sidelobe angles K.
    pub fn num_sidelobe(&self) -> usize {
        self.sidelobe_mask.iter().filter(|&&m| m).count()
    }
}

/// Partition of N antennas into L contiguous groups of M. The selection
/// operators of the design formulations are realized as index maps: applying
/// the group-l map to an N-row matrix extracts rows `l*M .. (l+1)*M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupStructure {
    num_groups: usize,
    group_size: usize,
}

impl GroupStructure {
    /// Divide `n` antennas into contiguous groups of `group_size`.
    pub fn new(n: usize, group_size: usize) -> Result<Self> {
        if n == 0 || group_size == 0 {
            return Err(Error::Config("antenna and group counts must be positive".into()));
        }
        if n % group_size != 0 {
            return Err(Error::Config(format!(
                "group size {group_size} does not divide array size {n}"
            )));
        }
        Ok(Self {
            num_groups: n / group_size,
            group_size,
        })
    }

    /// Number of groups L.
    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    /// Antennas per group M (also the number of complementary arrays).
    pub fn group_size(&self) -> usize {
        self.group_size
    }

    pub fn num_antennas(&self) -> usize {
        self.num_groups * self.group_size
    }

    /// Group containing antenna `i`.
    pub fn group_of(&self, antenna: usize) -> usize {
        antenna / self.group_size
    }

    /// Antenna indices of group `l` (contiguous).
    pub fn members_of(&self, group: usize) -> std::ops::Range<usize> {
        group * self.group_size..(group + 1) * self.group_size
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn steering_broadside_is_all_ones() {
        let g = ArrayGeometry::ula(8, 0.25, 0.0).unwrap();
        let a = g.steering_vector(0.0).unwrap();
        for v in a.iter() {
            assert_relative_eq!(v.re, 1.0, max_relative = 1e-15);
            assert_relative_eq!(v.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn steering_endfire_two_elements() {
        // N=2, x=[0,1], d/λ=0.25, θ=90° → [1, exp(jπ/2)]
        let g = ArrayGeometry::new(vec![0, 1], 0.25, 0.0).unwrap();
        let a = g.steering_vector(90.0).unwrap();
        assert_relative_eq!(a[0].re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(a[0].im, 0.0, epsilon = 1e-14);
        assert_relative_eq!(a[1].re, 0.0, epsilon = 1e-14);
        assert_relative_eq!(a[1].im, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn steering_sixteen_element_thirty_degrees_matches_reference() {
        // Reference values computed with an independent arbitrary-precision
        // evaluation of exp(j 2π (d/λ) x_n sin θ) at d/λ=0.25, θ=30°.
        let expected: [(f64, f64); 16] = [
            (1.0, 0.0),
            (0.70710678118654752, 0.70710678118654752),
            (0.0, 1.0),
            (-0.70710678118654752, 0.70710678118654752),
            (-1.0, 0.0),
            (-0.70710678118654752, -0.70710678118654752),
            (0.0, -1.0),
            (0.70710678118654752, -0.70710678118654752),
            (1.0, 0.0),
            (0.70710678118654752, 0.70710678118654752),
            (0.0, 1.0),
            (-0.70710678118654752, 0.70710678118654752),
            (-1.0, 0.0),
            (-0.70710678118654752, -0.70710678118654752),
            (0.0, -1.0),
            (0.70710678118654752, -0.70710678118654752),
        ];
        let g = ArrayGeometry::ula(16, 0.25, 0.0).unwrap();
        let a = g.steering_vector(30.0).unwrap();
        for (n, &(re, im)) in expected.iter().enumerate() {
            assert!(
                (a[n].re - re).abs() < 1e-12 && (a[n].im - im).abs() < 1e-12,
                "entry {n}: got {}, expected ({re}, {im})",
                a[n]
            );
        }
    }

    #[test]
    fn steering_rejects_out_of_range_angle() {
        let g = ArrayGeometry::ula(4, 0.5, 0.0).unwrap();
        assert!(matches!(g.steering_vector(91.0), Err(Error::Domain(_))));
    }

    #[test]
    fn steering_norm_squared_is_n() {
        let g = ArrayGeometry::ula(11, 0.25, 17.0).unwrap();
        let a = g.steer_vector();
        let n2: Complex64 = a.dotc(&a);
        assert_relative_eq!(n2.re, 11.0, max_relative = 1e-14);
        assert!(n2.im.abs() < 1e-14);
    }

    #[test]
    fn manifold_single_angle_is_ones_column() {
        let g = ArrayGeometry::ula(5, 0.25, 0.0).unwrap();
        let grid = AngleGrid::new(vec![0.0], vec![true]).unwrap();
        let m = g.manifold_matrix(&grid).unwrap();
        assert_eq!(m.shape(), (5, 1));
        for v in m.iter() {
            assert_relative_eq!(v.re, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn manifold_columns_match_steering_vectors() {
        let g = ArrayGeometry::ula(6, 0.25, 0.0).unwrap();
        let grid = AngleGrid::from_sidelobe_regions(5.0, &[(-90.0, -20.0), (20.0, 90.0)]).unwrap();
        let m = g.manifold_matrix(&grid).unwrap();
        for (k, theta) in grid.sidelobe_angles().iter().enumerate() {
            let a = g.steering_vector(*theta).unwrap();
            for n in 0..6 {
                assert!((m[(n, k)] - a[n]).norm() < 1e-15);
                assert_relative_eq!(m[(n, k)].norm(), 1.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn manifold_gram_is_psd_on_reference_grid() {
        let g = ArrayGeometry::ula(16, 0.25, 0.0).unwrap();
        let grid = AngleGrid::from_sidelobe_regions(1.0, &[(-90.0, -12.0), (12.0, 90.0)]).unwrap();
        assert_eq!(grid.num_sidelobe(), 158);
        let a = g.manifold_matrix(&grid).unwrap();
        let gram = &a * a.adjoint();
        let (min, max) = crate::linalg::eigen_extrema(&gram);
        assert!(min >= -1e-9 * max, "min eigenvalue {min}, max {max}");
    }

    #[test]
    fn groups_reference_cases() {
        let g = GroupStructure::new(16, 2).unwrap();
        assert_eq!(g.num_groups(), 8);
        assert_eq!(g.members_of(0).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(g.members_of(7).collect::<Vec<_>>(), vec![14, 15]);

        let g = GroupStructure::new(32, 2).unwrap();
        assert_eq!(g.num_groups(), 16);

        let g = GroupStructure::new(4, 4).unwrap();
        assert_eq!(g.num_groups(), 1);
        assert_eq!(g.members_of(0).collect::<Vec<_>>(), vec![0, 1, 2, 3]);

        assert!(GroupStructure::new(16, 3).is_err());
    }

    #[test]
    fn groups_partition_covers_all_antennas() {
        let g = GroupStructure::new(24, 4).unwrap();
        let mut seen = vec![0u32; 24];
        for l in 0..g.num_groups() {
            for i in g.members_of(l) {
                assert_eq!(g.group_of(i), l);
                seen[i] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn grid_permutation_covariance() {
        // Reordering the declared regions leaves the (sorted) grid unchanged.
        let g1 = AngleGrid::from_sidelobe_regions(1.0, &[(-90.0, -12.0), (12.0, 90.0)]).unwrap();
        let g2 = AngleGrid::from_sidelobe_regions(1.0, &[(12.0, 90.0), (-90.0, -12.0)]).unwrap();
        assert_eq!(g1, g2);
    }
}
