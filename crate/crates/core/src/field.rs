//! Complex amplitudes and densities sampled on a [`SpatialGrid`].
//!
//! Two-dimensional fields are stored row-major: the value at `(x_a[i], x_b[j])`
//! lives at index `i * n + j`.

use ndarray::{ArrayView1, ArrayView2, Axis as NdAxis};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Axis, SpatialGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    grid: SpatialGrid,
    values: Vec<Complex64>,
}

impl WaveField {
    pub fn new(grid: SpatialGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: SpatialGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Samples `f(x)` on a one-axis grid.
    pub fn from_fn_1d(grid: SpatialGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        expect_axes(&grid, 1)?;
        let values = grid.nodes().into_iter().map(f).collect();
        Ok(Self { grid, values })
    }

    /// Samples `f(x_a, x_b)` on a two-axis grid.
    pub fn from_fn_2d(grid: SpatialGrid, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        expect_axes(&grid, 2)?;
        let nodes = grid.nodes();
        let mut values = Vec::with_capacity(grid.len());
        for &xa in &nodes {
            for &xb in &nodes {
                values.push(f(xa, xb));
            }
        }
        Ok(Self { grid, values })
    }

    /// Outer product `psi(x_a) phi(x_b)` of two one-axis fields on the same grid.
    pub fn outer(psi: &WaveField, phi: &WaveField) -> Result<Self> {
        expect_axes(&psi.grid, 1)?;
        expect_axes(&phi.grid, 1)?;
        if psi.grid != phi.grid {
            return Err(Error::GridMismatch);
        }
        let mut values = Vec::with_capacity(psi.values.len() * phi.values.len());
        for a in &psi.values {
            for b in &phi.values {
                values.push(a * b);
            }
        }
        Ok(Self {
            grid: psi.grid.square_grid(),
            values,
        })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn view1(&self) -> Result<ArrayView1<'_, Complex64>> {
        expect_axes(&self.grid, 1)?;
        Ok(ArrayView1::from(&self.values[..]))
    }

    pub fn view2(&self) -> Result<ArrayView2<'_, Complex64>> {
        expect_axes(&self.grid, 2)?;
        let n = self.grid.points();
        Ok(ArrayView2::from_shape((n, n), &self.values).expect("grid length checked"))
    }

    /// `sum |psi|^2 dx^axes`.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    /// Rescales to unit L2 norm under the grid quadrature.
    pub fn normalize(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NullField);
        }
        let inv = 1.0 / norm;
        self.values.iter_mut().for_each(|v| *v *= inv);
        Ok(self)
    }

    pub fn scale(mut self, factor: Complex64) -> Self {
        self.values.iter_mut().for_each(|v| *v *= factor);
        self
    }

    /// `<self|other> = sum conj(self) other dx^axes`.
    pub fn inner(&self, other: &WaveField) -> Result<Complex64> {
        self.same_grid(other)?;
        let sum: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(sum * self.grid.cell_volume())
    }

    /// L2 distance `sqrt(sum |a - b|^2 dx^axes)`.
    pub fn l2_distance(&self, other: &WaveField) -> Result<f64> {
        self.same_grid(other)?;
        let sum: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((sum * self.grid.cell_volume()).sqrt())
    }

    /// Pointwise sum of two fields on the same grid.
    pub fn add(&self, other: &WaveField) -> Result<WaveField> {
        self.same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(WaveField {
            grid: self.grid,
            values,
        })
    }

    /// `|psi|^2` as a density; unit mass if the field is normalized.
    pub fn modulus_square(&self) -> DensityField {
        DensityField {
            grid: self.grid,
            values: self.values.iter().map(|v| v.norm_sqr()).collect(),
        }
    }

    fn same_grid(&self, other: &WaveField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    grid: SpatialGrid,
    values: Vec<f64>,
}

impl DensityField {
    /// Wraps nonnegative finite values; anything else is rejected.
    pub fn new(grid: SpatialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "density values must be finite and nonnegative, found {bad}"
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn_1d(grid: SpatialGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        expect_axes(&grid, 1)?;
        Self::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn from_fn_2d(grid: SpatialGrid, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        expect_axes(&grid, 2)?;
        let nodes = grid.nodes();
        let mut values = Vec::with_capacity(grid.len());
        for &xa in &nodes {
            for &xb in &nodes {
                values.push(f(xa, xb));
            }
        }
        Self::new(grid, values)
    }

    /// Product density `rho_a(x_a) rho_b(x_b)`.
    pub fn outer(rho_a: &DensityField, rho_b: &DensityField) -> Result<Self> {
        expect_axes(&rho_a.grid, 1)?;
        expect_axes(&rho_b.grid, 1)?;
        if rho_a.grid != rho_b.grid {
            return Err(Error::GridMismatch);
        }
        let mut values = Vec::with_capacity(rho_a.values.len() * rho_b.values.len());
        for a in &rho_a.values {
            for b in &rho_b.values {
                values.push(a * b);
            }
        }
        Ok(Self {
            grid: rho_a.grid.square_grid(),
            values,
        })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn view2(&self) -> Result<ArrayView2<'_, f64>> {
        expect_axes(&self.grid, 2)?;
        let n = self.grid.points();
        Ok(ArrayView2::from_shape((n, n), &self.values).expect("grid length checked"))
    }

    /// `sum rho dx^axes`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Rescales to unit mass under the grid quadrature.
    pub fn normalize(mut self) -> Result<Self> {
        let mass = self.mass();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::NullField);
        }
        let inv = 1.0 / mass;
        self.values.iter_mut().for_each(|v| *v *= inv);
        Ok(self)
    }

    /// Integrates the joint density over the other axis, leaving a density on `keep`.
    pub fn marginal(&self, keep: Axis) -> Result<DensityField> {
        let joint = self.view2()?;
        let dx = self.grid.spacing();
        let summed = joint.sum_axis(NdAxis(keep.other().index()));
        Ok(DensityField {
            grid: self.grid.axis_grid(),
            values: summed.iter().map(|v| v * dx).collect(),
        })
    }

    /// `sum |a - b| dx^axes`.
    pub fn l1_distance(&self, other: &DensityField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let sum: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum();
        Ok(sum * self.grid.cell_volume())
    }

    /// Largest pointwise difference.
    pub fn max_abs_difference(&self, other: &DensityField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

pub(crate) fn expect_axes(grid: &SpatialGrid, axes: usize) -> Result<()> {
    if grid.axes() != axes {
        return Err(Error::DimensionMismatch {
            expected: axes,
            found: grid.axes(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gaussian(x: f64, c: f64, w: f64) -> f64 {
        (-(x - c).powi(2) / (w * w)).exp() / (std::f64::consts::PI.sqrt() * w)
    }

    #[test]
    fn constant_density_normalizes_to_half() {
        let g = SpatialGrid::one_d(1.0, 8).unwrap();
        let rho = DensityField::from_fn_1d(g, |_| 2.0).unwrap();
        let rho = rho.normalize().unwrap();
        assert!(rho.values().iter().all(|&v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn wave_with_norm_four_is_halved() {
        let g = SpatialGrid::one_d(1.0, 8).unwrap();
        // sum |v|^2 dx = 8 * |v|^2 * 0.25 = 4  =>  |v| = sqrt(2)
        let amp = Complex64::new(1.0, 1.0);
        let psi = WaveField::from_fn_1d(g, |_| amp).unwrap();
        assert!((psi.norm_sqr() - 4.0).abs() < 1e-15);
        let psi = psi.normalize().unwrap();
        assert!(psi.values().iter().all(|v| (v - amp * 0.5).norm() < 1e-15));
    }

    #[test]
    fn zero_fields_are_rejected() {
        let g = SpatialGrid::one_d(1.0, 8).unwrap();
        assert_eq!(
            WaveField::zeros(g).normalize().unwrap_err(),
            Error::NullField
        );
        let rho = DensityField::from_fn_1d(g, |_| 0.0).unwrap();
        assert_eq!(rho.normalize().unwrap_err(), Error::NullField);
    }

    #[test]
    fn negative_density_rejected() {
        let g = SpatialGrid::one_d(1.0, 8).unwrap();
        assert!(DensityField::from_fn_1d(g, |x| x).is_err());
    }

    #[test]
    fn marginal_of_product_recovers_factor() {
        let g = SpatialGrid::one_d(8.0, 256).unwrap();
        let rho_a = DensityField::from_fn_1d(g, |x| gaussian(x, 1.0, 0.7)).unwrap();
        let rho_b = DensityField::from_fn_1d(g, |x| gaussian(x, -0.5, 1.1)).unwrap();
        let joint = DensityField::outer(&rho_a, &rho_b).unwrap();
        let ma = joint.marginal(Axis::A).unwrap();
        let mb = joint.marginal(Axis::B).unwrap();
        assert!(ma.max_abs_difference(&rho_a).unwrap() < 1e-10);
        assert!(mb.max_abs_difference(&rho_b).unwrap() < 1e-10);
    }

    #[test]
    fn uniform_joint_has_uniform_marginal() {
        let g = SpatialGrid::two_d(2.0, 16).unwrap();
        let joint = DensityField::from_fn_2d(g, |_, _| 1.0)
            .unwrap()
            .normalize()
            .unwrap();
        let m = joint.marginal(Axis::B).unwrap();
        assert!(m.values().iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn marginal_rejects_one_d() {
        let g = SpatialGrid::one_d(1.0, 8).unwrap();
        let rho = DensityField::from_fn_1d(g, |_| 1.0).unwrap();
        assert!(matches!(
            rho.marginal(Axis::A),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn marginal_preserves_total_mass(values in proptest::collection::vec(0.0f64..5.0, 64)) {
            prop_assume!(values.iter().sum::<f64>() > 1e-3);
            let g = SpatialGrid::two_d(1.5, 8).unwrap();
            let joint = DensityField::new(g, values).unwrap().normalize().unwrap();
            for axis in [Axis::A, Axis::B] {
                let m = joint.marginal(axis).unwrap();
                prop_assert!((m.mass() - joint.mass()).abs() < 1e-12);
            }
        }

        #[test]
        fn normalize_is_idempotent(values in proptest::collection::vec(-3.0f64..3.0, 32)) {
            let g = SpatialGrid::one_d(2.0, 16).unwrap();
            let vals: Vec<Complex64> = values.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
            let psi = WaveField::new(g, vals).unwrap();
            prop_assume!(psi.norm_sqr() > 1e-6);
            let once = psi.normalize().unwrap();
            let twice = once.clone().normalize().unwrap();
            for (a, b) in once.values().iter().zip(twice.values()) {
                prop_assert!((a - b).norm() <= 4.0 * f64::EPSILON * a.norm().max(1.0));
            }
            let rho = once.modulus_square();
            prop_assert!(rho.values().iter().all(|&v| v >= 0.0));
            prop_assert!((rho.mass() - 1.0).abs() < 1e-12);
        }
    }
}
