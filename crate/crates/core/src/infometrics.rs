//! Relative-entropy and Fisher-type functionals of gridded densities, the
//! cumulative fluctuation information along a trajectory, and the Bohm
//! potential obtained as its functional derivative.
//!
//! Densities are floored at `FLOOR_RELATIVE * peak` inside logarithms and
//! divisions. Results carry a flag recording whether the floor touched any
//! node.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::diff;
use crate::error::{Error, Result};
use crate::field::DensityField;
use crate::fluctuations::block_rng;
use crate::grid::{Masses, SpatialGrid};
use crate::spectral::Spectral;

/// Relative density floor.
pub const FLOOR_RELATIVE: f64 = 1e-14;

/// Largest mass of `p` allowed on nodes where `q` sits at or below its floor.
pub const CONTINUITY_TOLERANCE: f64 = 1e-8;

/// A value together with whether the density floor was applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Floored<T> {
    pub value: T,
    pub floor_applied: bool,
}

/// Frames `rho(., t_j)` on a uniform time ladder.
#[derive(Debug, Clone)]
pub struct DensityTrajectory {
    times: Vec<f64>,
    frames: Vec<DensityField>,
    dt: f64,
    masses: Masses,
    hbar: f64,
}

impl DensityTrajectory {
    /// Frames at `t0, t0 + dt, ...`; valid for a single frame too.
    pub fn with_step(
        t0: f64,
        dt: f64,
        frames: Vec<DensityField>,
        masses: Masses,
        hbar: f64,
    ) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {dt}"
            )));
        }
        let times = (0..frames.len()).map(|j| t0 + j as f64 * dt).collect();
        let mut t = Self::new(times, frames, masses, hbar)?;
        t.dt = dt;
        Ok(t)
    }

    pub fn new(
        times: Vec<f64>,
        frames: Vec<DensityField>,
        masses: Masses,
        hbar: f64,
    ) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::TooFewFrames { need: 1, got: 0 });
        }
        if times.len() != frames.len() {
            return Err(Error::LengthMismatch {
                expected: frames.len(),
                found: times.len(),
            });
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        let grid = *frames[0].grid();
        masses.expect_axes(&grid)?;
        for f in &frames {
            if *f.grid() != grid {
                return Err(Error::GridMismatch);
            }
            if (f.mass() - 1.0).abs() > 1e-8 {
                return Err(Error::InvalidParameter(format!(
                    "frame not normalized: mass {}",
                    f.mass()
                )));
            }
        }
        if times.len() > 1 {
            let dt = times[1] - times[0];
            if dt.is_nan() || dt <= 0.0 {
                return Err(Error::InvalidParameter("times must increase".into()));
            }
            for w in times.windows(2) {
                if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(w[1].abs()) {
                    return Err(Error::InvalidParameter("time step must be uniform".into()));
                }
            }
        }
        let dt = if times.len() > 1 {
            (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64
        } else {
            0.0
        };
        Ok(Self {
            times,
            frames,
            dt,
            masses,
            hbar,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn frames(&self) -> &[DensityField] {
        &self.frames
    }

    pub fn masses(&self) -> Masses {
        self.masses
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn grid(&self) -> &SpatialGrid {
        self.frames[0].grid()
    }

    /// Time step (0 for a single frame built without one).
    pub fn dt(&self) -> f64 {
        self.dt
    }
}

fn floor_of(values: &[f64]) -> f64 {
    FLOOR_RELATIVE * values.iter().copied().fold(0.0, f64::max)
}

fn floored(values: &[f64], eps: f64) -> (Vec<f64>, bool) {
    let mut applied = false;
    let v = values
        .iter()
        .map(|&r| {
            if r < eps {
                applied = true;
                eps
            } else {
                r
            }
        })
        .collect();
    (v, applied)
}

/// `sum p ln(p/q) dV` with both densities floored at the same level.
///
/// Each node contributes `p ln(p/q) - p + q`, which is nonnegative pointwise
/// and sums to the usual relative entropy when `p` and `q` carry equal mass.
pub fn kl_divergence(p: &DensityField, q: &DensityField) -> Result<Floored<f64>> {
    if p.grid() != q.grid() {
        return Err(Error::GridMismatch);
    }
    kl_values(p.values(), q.values(), p.grid().cell_volume())
}

fn kl_values(p: &[f64], q: &[f64], dv: f64) -> Result<Floored<f64>> {
    let eps_q = floor_of(q);
    let stranded: f64 = p
        .iter()
        .zip(q)
        .filter(|(&pi, &qi)| pi > 0.0 && qi <= eps_q)
        .map(|(&pi, _)| pi)
        .sum::<f64>()
        * dv;
    if stranded > CONTINUITY_TOLERANCE {
        return Err(Error::AbsoluteContinuity { mass: stranded });
    }
    let eps = eps_q.max(floor_of(p));
    let mut applied = false;
    let mut sum = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi < eps || qi < eps {
            applied = true;
        }
        let (a, b) = (pi.max(eps), qi.max(eps));
        if a != b {
            sum += (a * (a / b).ln() - a + b).max(0.0);
        }
    }
    Ok(Floored {
        value: sum * dv,
        floor_applied: applied,
    })
}

/// Instantaneous fluctuation-information rate
/// `sum_i (hbar / 4 m_i) int (d_i rho)^2 / rho`.
pub fn fisher_rate(rho: &DensityField, masses: Masses, hbar: f64) -> Result<Floored<f64>> {
    let grid = *rho.grid();
    masses.expect_axes(&grid)?;
    let (r, applied) = floored(rho.values(), floor_of(rho.values()));
    let mut total = 0.0;
    for (axis, m) in masses.iter().enumerate() {
        let d = diff::centered(&grid, axis, rho.values());
        let integral: f64 = d.iter().zip(&r).map(|(g, r)| g * g / r).sum();
        total += hbar / (4.0 * m) * integral * grid.cell_volume();
    }
    Ok(Floored {
        value: total,
        floor_applied: applied,
    })
}

/// Trapezoid time integral of [`fisher_rate`] over the frames.
pub fn i_f_continuum(traj: &DensityTrajectory) -> Result<Floored<f64>> {
    let n = traj.frames.len();
    if n < 2 {
        return Err(Error::TooFewFrames { need: 2, got: n });
    }
    let mut applied = false;
    let mut rates = Vec::with_capacity(n);
    for f in &traj.frames {
        let r = fisher_rate(f, traj.masses, traj.hbar)?;
        applied |= r.floor_applied;
        rates.push(r.value);
    }
    let dt = traj.dt();
    let inner: f64 = rates[1..n - 1].iter().sum();
    Ok(Floored {
        value: dt * (inner + 0.5 * (rates[0] + rates[n - 1])),
        floor_applied: applied,
    })
}

/// Monte Carlo estimate of the cumulative fluctuation information.
#[derive(Debug, Clone, PartialEq)]
pub struct IfEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Per-frame mean relative entropy.
    pub per_frame: Vec<f64>,
    pub floor_applied: bool,
}

/// `sum_j < KL(rho_j || rho_j(. + w)) >_w` over every frame, with `w` drawn
/// per axis from the fluctuation kernel of that axis' mass over one time
/// step. Shifts are applied spectrally. Frame `j` draws from stream `j` of
/// `seed`.
pub fn i_f_discrete(
    traj: &DensityTrajectory,
    samples_per_step: usize,
    seed: u64,
) -> Result<IfEstimate> {
    if samples_per_step < 2 {
        return Err(Error::TooFewSamples {
            need: 2,
            got: samples_per_step,
        });
    }
    let grid = *traj.grid();
    let dt = traj.dt;
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::InvalidParameter(
            "single-frame trajectory needs an explicit time step".into(),
        ));
    }
    let sigmas: Vec<f64> = traj
        .masses
        .iter()
        .map(|m| (traj.hbar * dt / (2.0 * m)).sqrt())
        .collect();
    let min_width = 2.0 * grid.spacing();
    if let Some(&s) = sigmas.iter().find(|&&s| s < min_width) {
        return Err(Error::KernelUnresolved {
            kernel_width: s,
            min_width,
        });
    }
    mc_sum(traj, &sigmas, samples_per_step, seed)
}

fn mc_sum(traj: &DensityTrajectory, sigmas: &[f64], m: usize, seed: u64) -> Result<IfEstimate> {
    let grid = *traj.grid();
    let mut spec = Spectral::new(grid);
    let k = grid.wavenumbers();
    let n = grid.points();
    let scale = spec.inverse_scale();
    let dv = grid.cell_volume();
    let mut per_frame = Vec::with_capacity(traj.frames.len());
    let mut var_sum = 0.0;
    let mut applied = false;
    let mut shifted = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut q = vec![0.0; grid.len()];
    let mut phase_a = vec![Complex64::new(0.0, 0.0); n];
    let mut phase_b = vec![Complex64::new(0.0, 0.0); n];
    for (j, frame) in traj.frames.iter().enumerate() {
        let mut hat: Vec<Complex64> = frame
            .values()
            .iter()
            .map(|&r| Complex64::new(r, 0.0))
            .collect();
        spec.forward(&mut hat);
        let mut rng: ChaCha8Rng = block_rng(seed, j as u64);
        let mut kls = Vec::with_capacity(m);
        for _ in 0..m {
            let w: Vec<f64> = sigmas
                .iter()
                .map(|s| s * rng.sample::<f64, _>(StandardNormal))
                .collect();
            for (p, &kk) in phase_a.iter_mut().zip(&k) {
                *p = Complex64::from_polar(scale, kk * w[0]);
            }
            if grid.axes() == 1 {
                for ((s, h), p) in shifted.iter_mut().zip(&hat).zip(&phase_a) {
                    *s = h * p;
                }
            } else {
                for (p, &kk) in phase_b.iter_mut().zip(&k) {
                    *p = Complex64::from_polar(1.0, kk * w[1]);
                }
                // transformed storage: index jb * n + ja
                for ((out, h), &pb) in shifted.chunks_mut(n).zip(hat.chunks(n)).zip(&phase_b) {
                    for ((s, x), pa) in out.iter_mut().zip(h).zip(&phase_a) {
                        *s = x * pa * pb;
                    }
                }
            }
            spec.inverse(&mut shifted);
            for (qi, s) in q.iter_mut().zip(&shifted) {
                *qi = s.re.max(0.0);
            }
            let kl = kl_values(frame.values(), &q, dv)?;
            applied |= kl.floor_applied;
            kls.push(kl.value);
        }
        let mean = kls.iter().sum::<f64>() / m as f64;
        let var = kls.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        per_frame.push(mean);
        var_sum += var;
    }
    Ok(IfEstimate {
        value: per_frame.iter().sum(),
        std_error: (var_sum / m as f64).sqrt(),
        per_frame,
        floor_applied: applied,
    })
}

/// `Q = -sum_i (hbar^2 / 2 m_i) (d_i^2 sqrt rho) / sqrt rho` on every node.
pub fn bohm_potential(rho: &DensityField, masses: Masses, hbar: f64) -> Result<Floored<Vec<f64>>> {
    let grid = *rho.grid();
    masses.expect_axes(&grid)?;
    let (r, applied) = floored(rho.values(), floor_of(rho.values()));
    let amp: Vec<f64> = r.iter().map(|v| v.sqrt()).collect();
    let mut q = vec![0.0; amp.len()];
    for (axis, m) in masses.iter().enumerate() {
        let c = -hbar * hbar / (2.0 * m);
        let lap = diff::second(&grid, axis, &amp);
        for ((qi, l), a) in q.iter_mut().zip(&lap).zip(&amp) {
            *qi += c * l / a;
        }
    }
    Ok(Floored {
        value: q,
        floor_applied: applied,
    })
}

/// Outcome of comparing the numerical functional derivative of
/// `(hbar/2) fisher_rate` with the Bohm potential.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientCheckReport {
    /// Step sizes used, largest first.
    pub eps_ladder: Vec<f64>,
    /// Relative deviation per perturbation after extrapolation in `eps`.
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    /// Per rung, the largest relative distance between the raw central
    /// difference and the extrapolated derivative (shrinks like `eps^2`).
    pub truncation_by_eps: Vec<f64>,
    /// False if a perturbed density went negative or the ladder did not
    /// show second-order behaviour.
    pub converged: bool,
}

/// Draws `count` random mass-preserving perturbations `eta = rho (g - <g>)`
/// with smooth periodic `g`, and compares
/// `[F(rho + e eta) - F(rho - e eta)] / 2e` (Richardson-extrapolated over
/// `e, e/2, e/4`) with `int eta Q`. Deviations are relative to `int |eta Q|`.
pub fn functional_gradient_check(
    rho: &DensityField,
    masses: Masses,
    hbar: f64,
    eps: f64,
    count: usize,
    seed: u64,
) -> Result<GradientCheckReport> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let grid = *rho.grid();
    masses.expect_axes(&grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let etas: Vec<Vec<f64>> = (0..count)
        .map(|_| random_perturbation(rho, &mut rng))
        .collect();
    gradient_check_with(rho, masses, hbar, eps, &etas)
}

/// [`functional_gradient_check`] with caller-supplied perturbations.
pub fn gradient_check_with(
    rho: &DensityField,
    masses: Masses,
    hbar: f64,
    eps: f64,
    etas: &[Vec<f64>],
) -> Result<GradientCheckReport> {
    let grid = *rho.grid();
    let dv = grid.cell_volume();
    let q = bohm_potential(rho, masses, hbar)?.value;
    let ladder = [eps, eps / 2.0, eps / 4.0];
    let f = |vals: Vec<f64>| -> Result<f64> {
        let d = DensityField::new(grid, vals)?;
        Ok(0.5 * hbar * fisher_rate(&d, masses, hbar)?.value)
    };
    let mut deviations = Vec::with_capacity(etas.len());
    let mut truncation = [0.0f64; 3];
    let mut converged = true;
    for eta in etas {
        if eta.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: eta.len(),
            });
        }
        let rhs: f64 = eta.iter().zip(&q).map(|(e, q)| e * q).sum::<f64>() * dv;
        let scale: f64 = eta.iter().zip(&q).map(|(e, q)| (e * q).abs()).sum::<f64>() * dv;
        if scale == 0.0 {
            deviations.push(0.0);
            continue;
        }
        let mut lhs = [0.0; 3];
        for (slot, &e) in lhs.iter_mut().zip(&ladder) {
            let plus: Vec<f64> = rho
                .values()
                .iter()
                .zip(eta)
                .map(|(r, h)| r + e * h)
                .collect();
            let minus: Vec<f64> = rho
                .values()
                .iter()
                .zip(eta)
                .map(|(r, h)| r - e * h)
                .collect();
            if minus.iter().chain(&plus).any(|&v| v < 0.0) {
                converged = false;
                let clip = |v: Vec<f64>| v.into_iter().map(|x| x.max(0.0)).collect::<Vec<_>>();
                *slot = (f(clip(plus))? - f(clip(minus))?) / (2.0 * e);
            } else {
                *slot = (f(plus)? - f(minus)?) / (2.0 * e);
            }
        }
        // Richardson on the finest pair; the coarse pair checks the order.
        let extrapolated = (4.0 * lhs[2] - lhs[1]) / 3.0;
        for (t, l) in truncation.iter_mut().zip(&lhs) {
            *t = t.max((l - extrapolated).abs() / scale);
        }
        let d01 = lhs[0] - lhs[1];
        let d12 = lhs[1] - lhs[2];
        let resolved = d01.abs() > 1e-9 * scale;
        if resolved {
            let ratio = d01 / d12;
            if !(3.0..=5.0).contains(&ratio) {
                converged = false;
            }
        }
        deviations.push((extrapolated - rhs).abs() / scale);
    }
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    Ok(GradientCheckReport {
        eps_ladder: ladder.to_vec(),
        deviations,
        max_deviation,
        truncation_by_eps: truncation.to_vec(),
        converged,
    })
}

/// `rho (g - <g>)` with `g` a sum of three low-order periodic modes.
pub fn random_perturbation(rho: &DensityField, rng: &mut impl Rng) -> Vec<f64> {
    let grid = *rho.grid();
    let kq = std::f64::consts::PI / grid.half_width();
    let modes: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            let ka = rng.random_range(1..=4) as f64 * kq;
            let kb = if grid.axes() == 2 {
                rng.random_range(-4..=4) as f64 * kq
            } else {
                0.0
            };
            let amp = rng.random_range(-1.0..1.0) / 3.0;
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            (ka, kb, amp, phase)
        })
        .collect();
    let nodes = grid.nodes();
    let n = grid.points();
    let g: Vec<f64> = (0..grid.len())
        .map(|idx| {
            let (xa, xb) = if grid.axes() == 1 {
                (nodes[idx], 0.0)
            } else {
                (nodes[idx / n], nodes[idx % n])
            };
            modes
                .iter()
                .map(|(ka, kb, a, p)| a * (ka * xa + kb * xb + p).sin())
                .sum()
        })
        .collect();
    let dv = grid.cell_volume();
    let mass = rho.mass();
    let mean: f64 = g.iter().zip(rho.values()).map(|(g, r)| g * r).sum::<f64>() * dv / mass;
    g.iter()
        .zip(rho.values())
        .map(|(g, r)| r * (g - mean))
        .collect()
}
