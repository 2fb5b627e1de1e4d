//! Uniform periodic grids on the box `[-L, L)` (one or two axes).
//!
//! Nodes sit at `x_k = -L + k * dx` for `k = 0..n`, with `dx = 2L / n`; the
//! node at `+L` is identified with `-L` and is not stored. Every quadrature in
//! the crate is the plain Riemann sum on these nodes, which is the trapezoid
//! rule on a periodic grid and matches the discrete Fourier inner product.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// One of the two subsystem axes of a bipartite grid.
///
/// Axis `A` is the row index (slow), axis `B` the column index (fast).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    A,
    B,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::A => 0,
            Axis::B => 1,
        }
    }

    pub fn other(self) -> Axis {
        match self {
            Axis::A => Axis::B,
            Axis::B => Axis::A,
        }
    }
}

/// Particle masses, one per grid axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Masses {
    values: [f64; 2],
    axes: usize,
}

impl Masses {
    pub fn one(m: f64) -> Result<Self> {
        check_mass(m)?;
        Ok(Self {
            values: [m, m],
            axes: 1,
        })
    }

    pub fn two(m_a: f64, m_b: f64) -> Result<Self> {
        check_mass(m_a)?;
        check_mass(m_b)?;
        Ok(Self {
            values: [m_a, m_b],
            axes: 2,
        })
    }

    pub fn axes(&self) -> usize {
        self.axes
    }

    /// Mass attached to grid axis `axis` (0 or 1).
    pub fn get(&self, axis: usize) -> f64 {
        assert!(axis < self.axes, "axis {axis} out of range");
        self.values[axis]
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.values[..self.axes].iter().copied()
    }

    pub(crate) fn expect_axes(&self, grid: &SpatialGrid) -> Result<()> {
        if self.axes != grid.axes() {
            return Err(Error::DimensionMismatch {
                expected: grid.axes(),
                found: self.axes,
            });
        }
        Ok(())
    }
}

fn check_mass(m: f64) -> Result<()> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mass must be positive, got {m}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    half_width: f64,
    points: usize,
    axes: usize,
}

impl SpatialGrid {
    pub fn new(half_width: f64, points: usize, axes: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::NonPositiveHalfWidth(half_width));
        }
        if !points.is_multiple_of(2) {
            return Err(Error::OddPointCount(points));
        }
        if points < 8 {
            return Err(Error::TooFewPoints(points));
        }
        if !(1..=2).contains(&axes) {
            return Err(Error::UnsupportedAxes(axes));
        }
        Ok(Self {
            half_width,
            points,
            axes,
        })
    }

    pub fn one_d(half_width: f64, points: usize) -> Result<Self> {
        Self::new(half_width, points, 1)
    }

    pub fn two_d(half_width: f64, points: usize) -> Result<Self> {
        Self::new(half_width, points, 2)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Points per axis.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn axes(&self) -> usize {
        self.axes
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Total node count (`n` or `n^2`).
    pub fn len(&self) -> usize {
        self.points.pow(self.axes as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight of a single node, `dx^axes`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.axes as i32)
    }

    /// Total box volume `(2L)^axes`.
    pub fn volume(&self) -> f64 {
        (2.0 * self.half_width).powi(self.axes as i32)
    }

    pub fn node(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.spacing()
    }

    /// Node coordinates along one axis.
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.node(k)).collect()
    }

    /// The same axis layout with a single axis.
    pub fn axis_grid(&self) -> SpatialGrid {
        SpatialGrid { axes: 1, ..*self }
    }

    /// The same axis layout lifted to two axes.
    pub fn square_grid(&self) -> SpatialGrid {
        SpatialGrid { axes: 2, ..*self }
    }

    /// Angular wavenumbers in FFT order: `k_j = (pi / L) * m_j` with
    /// `m_j = j` for `j < n/2` and `m_j = j - n` otherwise.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.points as i64;
        let dk = PI / self.half_width;
        (0..n)
            .map(|j| {
                let m = if j < n / 2 { j } else { j - n };
                m as f64 * dk
            })
            .collect()
    }

    /// Largest representable |k| (the Nyquist wavenumber `pi / dx`).
    pub fn nyquist(&self) -> f64 {
        PI / self.spacing()
    }

    /// Index of the node nearest to `x` after wrapping into the box.
    pub fn nearest_index(&self, x: f64) -> usize {
        let width = 2.0 * self.half_width;
        let shifted = (x + self.half_width).rem_euclid(width);
        ((shifted / self.spacing()).round() as usize) % self.points
    }

    /// Wraps a coordinate into `[-L, L)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let width = 2.0 * self.half_width;
        (x + self.half_width).rem_euclid(width) - self.half_width
    }
}

/// Factor on the spreading width that keeps the analytic Gaussian mass outside
/// the box far below `1e-12` (the erfc of this margin is ~4e-20).
pub const DEFAULT_BOX_MARGIN: f64 = 6.5;

/// Half width that holds a Gaussian packet centred at `center` with density
/// width `width` (the `beta_t` of `exp(-(x-c)^2/beta_t^2)`).
pub fn half_width_for_packet(center: f64, width: f64) -> f64 {
    center.abs() + DEFAULT_BOX_MARGIN * width
}
