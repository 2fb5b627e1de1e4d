//! Discrete Fourier transforms on a [`SpatialGrid`].
//!
//! Two-axis transforms leave k-space in transposed order: after
//! [`Spectral::forward`] the coefficient for `(k_a[ja], k_b[jb])` sits at
//! `jb * n + ja`. [`Spectral::inverse`] undoes this, so callers only need the
//! layout when they build multipliers (see [`Spectral::kspace_index`]).
//! Transforms are unnormalized; multiply by [`Spectral::inverse_scale`] once
//! per round trip.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::SpatialGrid;

pub struct Spectral {
    grid: SpatialGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    work: Vec<Complex64>,
}

impl Spectral {
    pub fn new(grid: SpatialGrid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.points();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        let work_len = if grid.axes() == 2 { grid.len() } else { 0 };
        Self {
            grid,
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            work: vec![Complex64::new(0.0, 0.0); work_len],
        }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    /// Position of the `(ja, jb)` coefficient in transformed storage.
    pub fn kspace_index(&self, ja: usize, jb: usize) -> usize {
        jb * self.grid.points() + ja
    }

    /// `1 / (number of nodes)`: the factor that makes inverse(forward(x)) = x.
    pub fn inverse_scale(&self) -> f64 {
        1.0 / self.grid.len() as f64
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.grid.len());
        self.forward.process_with_scratch(data, &mut self.scratch);
        if self.grid.axes() == 2 {
            transpose(data, &mut self.work, self.grid.points());
            self.forward
                .process_with_scratch(&mut self.work, &mut self.scratch);
            data.copy_from_slice(&self.work);
        }
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.grid.len());
        self.inverse.process_with_scratch(data, &mut self.scratch);
        if self.grid.axes() == 2 {
            transpose(data, &mut self.work, self.grid.points());
            self.inverse
                .process_with_scratch(&mut self.work, &mut self.scratch);
            data.copy_from_slice(&self.work);
        }
    }

    /// Multiplier table `f(k_a, k_b)` in transformed storage order
    /// (`f(k, 0.0)` on one-axis grids).
    pub fn multiplier(&self, f: impl Fn(f64, f64) -> Complex64) -> Vec<Complex64> {
        let k = self.grid.wavenumbers();
        match self.grid.axes() {
            1 => k.iter().map(|&ka| f(ka, 0.0)).collect(),
            _ => {
                let n = k.len();
                let mut out = vec![Complex64::new(0.0, 0.0); n * n];
                for (jb, &kb) in k.iter().enumerate() {
                    for (ja, &ka) in k.iter().enumerate() {
                        out[jb * n + ja] = f(ka, kb);
                    }
                }
                out
            }
        }
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const BLOCK: usize = 32;
    for ib in (0..n).step_by(BLOCK) {
        for jb in (0..n).step_by(BLOCK) {
            for i in ib..(ib + BLOCK).min(n) {
                for j in jb..(jb + BLOCK).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}
