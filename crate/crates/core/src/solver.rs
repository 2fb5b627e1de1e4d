//! Strang split-step Fourier evolution of one particle or two
//! non-interacting particles, the Madelung (density, phase-gradient) view of
//! a wave field, and residuals of the hydrodynamic equations along a
//! trajectory.

use num_complex::Complex64;

use crate::diff;
use crate::error::{Error, Result};
use crate::field::{DensityField, WaveField};
use crate::grid::{Masses, SpatialGrid};
use crate::infometrics::{bohm_potential, DensityTrajectory, FLOOR_RELATIVE};
use crate::spectral::Spectral;

/// Largest allowed kinetic phase per step.
pub const MAX_KINETIC_PHASE: f64 = std::f64::consts::FRAC_PI_4;

/// Relative density below which residuals are not evaluated.
pub const RESIDUAL_MASK: f64 = 1e-6;

/// External potential. Two-axis potentials are stored per axis, so the
/// total is always `V_a(x_a) + V_b(x_b)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Free,
    /// Samples on the axis nodes; one vector per axis.
    Separable(Vec<Vec<f64>>),
}

impl Potential {
    pub fn one_d(grid: &SpatialGrid, v: impl Fn(f64) -> f64) -> Self {
        Potential::Separable(vec![grid.nodes().iter().map(|&x| v(x)).collect()])
    }

    pub fn two_d(grid: &SpatialGrid, va: impl Fn(f64) -> f64, vb: impl Fn(f64) -> f64) -> Self {
        let nodes = grid.nodes();
        Potential::Separable(vec![
            nodes.iter().map(|&x| va(x)).collect(),
            nodes.iter().map(|&x| vb(x)).collect(),
        ])
    }

    /// Values on every node of `grid` (row-major on two axes).
    pub fn sample(&self, grid: &SpatialGrid) -> Vec<f64> {
        match self {
            Potential::Free => vec![0.0; grid.len()],
            Potential::Separable(parts) => {
                if grid.axes() == 1 {
                    parts[0].clone()
                } else {
                    let mut out = Vec::with_capacity(grid.len());
                    for va in &parts[0] {
                        for vb in &parts[1] {
                            out.push(va + vb);
                        }
                    }
                    out
                }
            }
        }
    }

    fn check(&self, grid: &SpatialGrid) -> Result<()> {
        if let Potential::Separable(parts) = self {
            if parts.len() != grid.axes() {
                return Err(Error::DimensionMismatch {
                    expected: grid.axes(),
                    found: parts.len(),
                });
            }
            for p in parts {
                if p.len() != grid.points() {
                    return Err(Error::LengthMismatch {
                        expected: grid.points(),
                        found: p.len(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Deliberate defects for negative controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Rotates the kinetic phase the wrong way.
    FlipKineticSign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionSpec {
    pub masses: Masses,
    pub hbar: f64,
    pub potential: Potential,
    pub dt: f64,
    pub steps: usize,
    /// Keep every `stride`-th step; `steps` must be a multiple.
    pub stride: usize,
    pub fault: Option<Fault>,
}

impl EvolutionSpec {
    pub fn free(masses: Masses, hbar: f64, dt: f64, steps: usize, stride: usize) -> Self {
        Self {
            masses,
            hbar,
            potential: Potential::Free,
            dt,
            steps,
            stride,
            fault: None,
        }
    }

    /// Kinetic phase `hbar dt sum_i k_max^2 / 2 m_i` at the grid Nyquist.
    pub fn max_kinetic_phase(&self, grid: &SpatialGrid) -> f64 {
        let k = grid.nyquist();
        let symbol: f64 = self.masses.iter().map(|m| k * k / (2.0 * m)).sum();
        self.hbar * symbol * self.dt.abs()
    }

    pub fn validate(&self, grid: &SpatialGrid) -> Result<()> {
        self.masses.expect_axes(grid)?;
        self.potential.check(grid)?;
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "hbar must be positive, got {}",
                self.hbar
            )));
        }
        if !(self.dt.is_finite() && self.dt != 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt must be nonzero, got {}",
                self.dt
            )));
        }
        if self.stride == 0 || !self.steps.is_multiple_of(self.stride) {
            return Err(Error::InvalidParameter(format!(
                "stride {} must divide steps {}",
                self.stride, self.steps
            )));
        }
        let phase = self.max_kinetic_phase(grid);
        if phase >= MAX_KINETIC_PHASE {
            // 0.9 keeps the suggestion strictly inside the bound
            let suggested_dt = 0.9 * self.dt.abs() * MAX_KINETIC_PHASE / phase;
            return Err(Error::KineticPhaseTooLarge {
                phase,
                suggested_dt,
            });
        }
        Ok(())
    }
}

/// Frames kept by [`evolve`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub frames: Vec<WaveField>,
}

impl Trajectory {
    pub fn last(&self) -> &WaveField {
        self.frames.last().expect("trajectory is never empty")
    }

    pub fn frame_dt(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    pub fn densities(&self, masses: Masses, hbar: f64) -> Result<DensityTrajectory> {
        DensityTrajectory::new(
            self.times.clone(),
            self.frames.iter().map(|f| f.modulus_square()).collect(),
            masses,
            hbar,
        )
    }
}

/// Reusable split-step propagator for one grid and spec.
pub struct Stepper {
    spectral: Spectral,
    /// Unit-modulus kinetic factor per step.
    kinetic: Vec<Complex64>,
    scale: f64,
    half_potential: Option<Vec<Complex64>>,
}

impl Stepper {
    pub fn new(grid: SpatialGrid, spec: &EvolutionSpec) -> Result<Self> {
        spec.validate(&grid)?;
        let spectral = Spectral::new(grid);
        let scale = spectral.inverse_scale();
        let sign = match spec.fault {
            Some(Fault::FlipKineticSign) => 1.0,
            None => -1.0,
        };
        let (hbar, dt) = (spec.hbar, spec.dt);
        let masses = spec.masses;
        let kinetic = spectral.multiplier(|ka, kb| {
            let mut symbol = ka * ka / (2.0 * masses.get(0));
            if masses.axes() == 2 {
                symbol += kb * kb / (2.0 * masses.get(1));
            }
            Complex64::from_polar(1.0, sign * hbar * symbol * dt)
        });
        let half_potential = match &spec.potential {
            Potential::Free => None,
            p => Some(
                p.sample(&grid)
                    .iter()
                    .map(|v| Complex64::from_polar(1.0, -v * dt / (2.0 * hbar)))
                    .collect(),
            ),
        };
        Ok(Self {
            spectral,
            kinetic,
            scale,
            half_potential,
        })
    }

    /// One Strang step: half potential, full kinetic, half potential.
    pub fn step(&mut self, psi: &mut [Complex64]) {
        if let Some(v) = &self.half_potential {
            psi.iter_mut().zip(v).for_each(|(a, b)| *a *= b);
        }
        self.spectral.forward(psi);
        let scale = self.scale;
        psi.iter_mut()
            .zip(&self.kinetic)
            .for_each(|(a, b)| *a *= b * scale);
        self.spectral.inverse(psi);
        if let Some(v) = &self.half_potential {
            psi.iter_mut().zip(v).for_each(|(a, b)| *a *= b);
        }
    }

    /// `steps` Strang steps. Without a potential the inverse and forward
    /// transforms between steps cancel, so the kinetic factor is applied
    /// `steps` times in k-space between a single pair of transforms.
    pub fn advance(&mut self, psi: &mut [Complex64], steps: usize) {
        if self.half_potential.is_some() {
            for _ in 0..steps {
                self.step(psi);
            }
            return;
        }
        if steps == 0 {
            return;
        }
        self.spectral.forward(psi);
        for _ in 1..steps {
            psi.iter_mut().zip(&self.kinetic).for_each(|(a, b)| *a *= b);
        }
        let scale = self.scale;
        psi.iter_mut()
            .zip(&self.kinetic)
            .for_each(|(a, b)| *a *= b * scale);
        self.spectral.inverse(psi);
    }
}

/// Evolves `psi0` for `spec.steps` steps, keeping every `spec.stride`-th frame
/// (the initial frame included).
pub fn evolve(psi0: &WaveField, spec: &EvolutionSpec) -> Result<Trajectory> {
    let grid = *psi0.grid();
    let norm = psi0.norm_sqr();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "initial field not normalized: norm^2 = {norm}"
        )));
    }
    let mut stepper = Stepper::new(grid, spec)?;
    let mut psi = psi0.values().to_vec();
    let mut times = vec![0.0];
    let mut frames = vec![psi0.clone()];
    for s in (spec.stride..=spec.steps).step_by(spec.stride) {
        stepper.advance(&mut psi, spec.stride);
        times.push(s as f64 * spec.dt);
        frames.push(WaveField::new(grid, psi.clone())?);
    }
    Ok(Trajectory { times, frames })
}

/// Evolves the last frame back with `-dt` and returns its L2 distance to the
/// first frame.
pub fn time_reverse_check(traj: &Trajectory, spec: &EvolutionSpec) -> Result<f64> {
    if spec.steps == 0 {
        return Ok(0.0);
    }
    let back = EvolutionSpec {
        dt: -spec.dt,
        stride: spec.steps,
        ..spec.clone()
    };
    let rev = evolve(traj.last(), &back)?;
    rev.last().l2_distance(&traj.frames[0])
}

/// `<H>` with kinetic energy from the Fourier symbol and potential energy by
/// quadrature.
pub fn energy(psi: &WaveField, spec: &EvolutionSpec) -> Result<f64> {
    let grid = *psi.grid();
    spec.masses.expect_axes(&grid)?;
    let mut spectral = Spectral::new(grid);
    let mut hat = psi.values().to_vec();
    spectral.forward(&mut hat);
    let masses = spec.masses;
    let symbol = spectral.multiplier(|ka, kb| {
        let mut s = ka * ka / (2.0 * masses.get(0));
        if masses.axes() == 2 {
            s += kb * kb / (2.0 * masses.get(1));
        }
        Complex64::new(s, 0.0)
    });
    // Parseval: sum |psi|^2 dV = dV / len * sum |hat|^2
    let w = grid.cell_volume() * spectral.inverse_scale();
    let kinetic: f64 = hat
        .iter()
        .zip(&symbol)
        .map(|(h, s)| h.norm_sqr() * s.re)
        .sum::<f64>()
        * w
        * spec.hbar
        * spec.hbar;
    let v = spec.potential.sample(&grid);
    let potential: f64 = psi
        .values()
        .iter()
        .zip(&v)
        .map(|(p, v)| p.norm_sqr() * v)
        .sum::<f64>()
        * grid.cell_volume();
    Ok((kinetic + potential) / psi.norm_sqr())
}

/// Density and phase gradient of a wave field, `psi = sqrt(rho) e^{iS/hbar}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MadelungPair {
    pub rho: DensityField,
    /// `dS/dx_i` per axis, in momentum units; zero where `rho` is floored.
    pub grad_s: Vec<Vec<f64>>,
    pub floor_applied: bool,
}

/// `grad S = hbar Im(psi* grad psi) / |psi|^2` with centred differences.
pub fn madelung_decompose(psi: &WaveField, hbar: f64) -> MadelungPair {
    let grid = *psi.grid();
    let rho = psi.modulus_square();
    let floor = FLOOR_RELATIVE * rho.peak();
    let mut floor_applied = false;
    let mut grad_s = Vec::with_capacity(grid.axes());
    for axis in 0..grid.axes() {
        let d = diff::centered(&grid, axis, psi.values());
        let g = psi
            .values()
            .iter()
            .zip(&d)
            .zip(rho.values())
            .map(|((p, dp), &r)| {
                if r <= floor {
                    floor_applied = true;
                    0.0
                } else {
                    hbar * (p.conj() * dp).im / r
                }
            })
            .collect();
        grad_s.push(g);
    }
    MadelungPair {
        rho,
        grad_s,
        floor_applied,
    }
}

/// Masked L2 norms of the continuity and quantum Hamilton-Jacobi residuals
/// at one interior frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualNorms {
    pub time: f64,
    pub continuity: f64,
    pub hamilton_jacobi: f64,
}

/// Residuals at every interior frame, with centred time differences between
/// neighbouring frames.
pub fn residuals(traj: &Trajectory, spec: &EvolutionSpec) -> Result<Vec<ResidualNorms>> {
    let n = traj.frames.len();
    if n < 3 {
        return Err(Error::TooFewFrames { need: 3, got: n });
    }
    let grid = *traj.frames[0].grid();
    spec.masses.expect_axes(&grid)?;
    spec.potential.check(&grid)?;
    let hbar = spec.hbar;
    let v = spec.potential.sample(&grid);
    let dv = grid.cell_volume();
    let h = traj.frame_dt();
    let mut out = Vec::with_capacity(n - 2);
    for j in 1..n - 1 {
        let psi = &traj.frames[j];
        let (prev, next) = (&traj.frames[j - 1], &traj.frames[j + 1]);
        let mp = madelung_decompose(psi, hbar);
        let q = bohm_potential(&mp.rho, spec.masses, hbar)?.value;
        let r = mp.rho.values();
        let cut = RESIDUAL_MASK * mp.rho.peak();

        let mut div = vec![0.0; grid.len()];
        for (axis, m) in spec.masses.iter().enumerate() {
            let flux: Vec<f64> = r
                .iter()
                .zip(&mp.grad_s[axis])
                .map(|(r, g)| r * g / m)
                .collect();
            let d = diff::centered(&grid, axis, &flux);
            div.iter_mut().zip(&d).for_each(|(a, b)| *a += b);
        }

        let mut cont = 0.0;
        let mut hj = 0.0;
        for k in 0..grid.len() {
            if r[k] <= cut {
                continue;
            }
            let dpsi = (next.values()[k] - prev.values()[k]) / (2.0 * h);
            let drho = (next.values()[k].norm_sqr() - prev.values()[k].norm_sqr()) / (2.0 * h);
            let ds_dt = hbar * (psi.values()[k].conj() * dpsi).im / r[k];
            let kinetic: f64 = spec
                .masses
                .iter()
                .enumerate()
                .map(|(axis, m)| mp.grad_s[axis][k].powi(2) / (2.0 * m))
                .sum();
            let c = drho + div[k];
            let e = ds_dt + kinetic + v[k] + q[k];
            cont += c * c;
            hj += e * e;
        }
        out.push(ResidualNorms {
            time: traj.times[j],
            continuity: (cont * dv).sqrt(),
            hamilton_jacobi: (hj * dv).sqrt(),
        });
    }
    Ok(out)
}
