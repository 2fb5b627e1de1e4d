//! Closed-form free-particle states: Gaussian packets, the two-packet
//! superposition with its interference phase, the matching classical mixture,
//! and a two-branch plane-wave superposition.
//!
//! Pointwise functions evaluate the infinite-line formulas. The `*_field`
//! constructors sample them on a grid and renormalize on the box, since the
//! two-packet and plane-wave states are not square integrable on the plane.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{expect_axes, DensityField, WaveField};
use crate::grid::{half_width_for_packet, SpatialGrid};

/// Physical parameters of one free Gaussian packet starting at `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketParams {
    mass: f64,
    hbar: f64,
    alpha: f64,
    p0: f64,
}

impl PacketParams {
    pub fn new(mass: f64, hbar: f64, alpha: f64, p0: f64) -> Result<Self> {
        for (name, v) in [("mass", mass), ("hbar", hbar), ("alpha", alpha)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !p0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "p0 must be finite, got {p0}"
            )));
        }
        Ok(Self {
            mass,
            hbar,
            alpha,
            p0,
        })
    }

    /// Packet with a given initial position width `beta = alpha * hbar`.
    pub fn with_width(mass: f64, hbar: f64, beta: f64, p0: f64) -> Result<Self> {
        Self::new(mass, hbar, beta / hbar, p0)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    /// Initial position width `alpha * hbar`.
    pub fn beta(&self) -> f64 {
        self.alpha * self.hbar
    }

    /// Spreading time `m hbar alpha^2`.
    pub fn tau(&self) -> f64 {
        self.mass * self.hbar * self.alpha * self.alpha
    }

    /// Width at time `t`: `beta * sqrt(1 + (t/tau)^2)`.
    pub fn beta_at(&self, t: f64) -> f64 {
        let s = t / self.tau();
        self.beta() * (1.0 + s * s).sqrt()
    }

    /// Classical centre `p0 t / m`.
    pub fn center(&self, t: f64) -> f64 {
        self.p0 * t / self.mass
    }

    /// `p0^2 / 2m`.
    pub fn energy(&self) -> f64 {
        self.p0 * self.p0 / (2.0 * self.mass)
    }

    /// Half width that keeps this packet inside the box up to time `t`.
    pub fn half_width_until(&self, t: f64) -> f64 {
        half_width_for_packet(self.center(t), self.beta_at(t))
            .max(half_width_for_packet(0.0, self.beta()))
    }
}

/// The pair used for the two-packet figures: `m_b = 2 m_a`,
/// `alpha_b = alpha_a / sqrt 2` (equal spreading times), `alpha_a p0 = 2 sqrt 2`
/// and `alpha_a hbar = 1 / (2 sqrt 2)`. Packet B is at rest.
pub fn figure_pair(mass_a: f64, hbar: f64) -> Result<(PacketParams, PacketParams)> {
    let alpha_a = 1.0 / (2.0 * SQRT_2 * hbar);
    let p0 = 2.0 * SQRT_2 / alpha_a;
    let a = PacketParams::new(mass_a, hbar, alpha_a, p0)?;
    let b = PacketParams::new(2.0 * mass_a, hbar, alpha_a / SQRT_2, 0.0)?;
    Ok((a, b))
}

/// Free Gaussian packet `psi(x, t)`.
pub fn gaussian_packet(params: &PacketParams, x: f64, t: f64) -> Complex64 {
    let beta = params.beta();
    let z = Complex64::new(1.0, t / params.tau());
    let prefactor = (z * (PI.sqrt() * beta)).sqrt().inv();
    let plane = Complex64::from_polar(1.0, (params.p0 * x - params.energy() * t) / params.hbar);
    let dx = x - params.center(t);
    let envelope = (-(dx * dx) / (2.0 * beta * beta * z)).exp();
    prefactor * plane * envelope
}

/// `|psi(x, t)|^2` in closed form.
pub fn gaussian_density(params: &PacketParams, x: f64, t: f64) -> f64 {
    let bt = params.beta_at(t);
    let dx = x - params.center(t);
    (-(dx * dx) / (bt * bt)).exp() / (PI.sqrt() * bt)
}

/// Argument of `psi(x, t)`: plane-wave phase, chirp, and the
/// `-atan(t/tau)/2` phase carried by the complex prefactor.
pub fn gaussian_phase(params: &PacketParams, x: f64, t: f64) -> f64 {
    let dx = x - params.center(t);
    let bt = params.beta_at(t);
    (params.p0 * x - params.energy() * t) / params.hbar
        + dx * dx * t / (2.0 * params.tau() * bt * bt)
        - 0.5 * (t / params.tau()).atan()
}

/// Momenta of the two plane-wave branches
/// `exp(i(p_a1 x_a + p_b1 x_b)/hbar) + exp(i(p_a2 x_a + p_b2 x_b)/hbar)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveMomenta {
    pub p_a1: f64,
    pub p_a2: f64,
    pub p_b1: f64,
    pub p_b2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScenarioKind {
    Entangled,
    Mixture,
    PlaneWave {
        momenta: PlaneWaveMomenta,
        /// Box normalization: the state is `(e1 + e2) / sqrt(2 Z)`.
        z: f64,
    },
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Entangled => "entangled",
            ScenarioKind::Mixture => "mixture",
            ScenarioKind::PlaneWave { .. } => "plane_wave",
        }
    }
}

/// Two free particles on a square periodic grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BipartiteScenario {
    pub packet_a: PacketParams,
    pub packet_b: PacketParams,
    pub grid: SpatialGrid,
    pub kind: ScenarioKind,
}

impl BipartiteScenario {
    pub fn entangled(a: PacketParams, b: PacketParams, grid: SpatialGrid) -> Result<Self> {
        Self::packets(a, b, grid, ScenarioKind::Entangled)
    }

    pub fn mixture(a: PacketParams, b: PacketParams, grid: SpatialGrid) -> Result<Self> {
        Self::packets(a, b, grid, ScenarioKind::Mixture)
    }

    fn packets(
        a: PacketParams,
        b: PacketParams,
        grid: SpatialGrid,
        kind: ScenarioKind,
    ) -> Result<Self> {
        expect_axes(&grid, 2)?;
        check_same_hbar(&a, &b)?;
        Ok(Self {
            packet_a: a,
            packet_b: b,
            grid,
            kind,
        })
    }

    /// Plane-wave superposition; masses and `hbar` come from the packets.
    /// Every momentum must be an integer multiple of `pi hbar / L` and lie
    /// strictly below the grid Nyquist momentum.
    pub fn plane_wave(
        a: PacketParams,
        b: PacketParams,
        grid: SpatialGrid,
        momenta: PlaneWaveMomenta,
    ) -> Result<Self> {
        expect_axes(&grid, 2)?;
        check_same_hbar(&a, &b)?;
        let hbar = a.hbar();
        let quantum = PI * hbar / grid.half_width();
        let nyquist = grid.nyquist() * hbar;
        for p in [momenta.p_a1, momenta.p_a2, momenta.p_b1, momenta.p_b2] {
            let m = p / quantum;
            if (m - m.round()).abs() > 1e-9 * m.abs().max(1.0) {
                return Err(Error::MomentumNotPeriodic {
                    momentum: p,
                    quantum,
                });
            }
            if p.abs() >= nyquist {
                return Err(Error::MomentumAboveNyquist {
                    momentum: p,
                    nyquist,
                });
            }
        }
        // Z = ||e1 + e2||^2 / 2 on the box, by grid quadrature.
        let nodes = grid.nodes();
        let mut sum = 0.0;
        for &xa in &nodes {
            for &xb in &nodes {
                let e1 = Complex64::from_polar(1.0, (momenta.p_a1 * xa + momenta.p_b1 * xb) / hbar);
                let e2 = Complex64::from_polar(1.0, (momenta.p_a2 * xa + momenta.p_b2 * xb) / hbar);
                sum += (e1 + e2).norm_sqr();
            }
        }
        let z = 0.5 * sum * grid.cell_volume();
        Ok(Self {
            packet_a: a,
            packet_b: b,
            grid,
            kind: ScenarioKind::PlaneWave { momenta, z },
        })
    }

    pub fn hbar(&self) -> f64 {
        self.packet_a.hbar()
    }

    pub fn masses(&self) -> (f64, f64) {
        (self.packet_a.mass(), self.packet_b.mass())
    }

    /// `N = 1 / sqrt(1 + exp(-(alpha_a p0 / 2)^2))`, the infinite-line
    /// normalization factor. Reported for comparison; fields are renormalized
    /// on the box instead.
    pub fn normalization_factor(&self) -> f64 {
        let q = self.packet_a.alpha() * self.packet_a.p0() / 2.0;
        1.0 / (1.0 + (-q * q).exp()).sqrt()
    }

    /// Spreading time of packet A; the unit of time in scenario configs.
    pub fn tau(&self) -> f64 {
        self.packet_a.tau()
    }

    fn require(&self, expected: &'static str) -> Result<()> {
        if self.kind.name() != expected {
            return Err(Error::WrongScenarioKind {
                expected,
                found: self.kind.name(),
            });
        }
        Ok(())
    }

    fn require_packets(&self) -> Result<()> {
        match self.kind {
            ScenarioKind::PlaneWave { .. } => Err(Error::WrongScenarioKind {
                expected: "entangled or mixture",
                found: "plane_wave",
            }),
            _ => Ok(()),
        }
    }
}

fn check_same_hbar(a: &PacketParams, b: &PacketParams) -> Result<()> {
    if a.hbar() != b.hbar() {
        return Err(Error::InvalidParameter(format!(
            "packets disagree on hbar: {} vs {}",
            a.hbar(),
            b.hbar()
        )));
    }
    Ok(())
}

/// `(N / sqrt 2) [psi_A(x_a, t) + psi_B(x_b, t)]`.
pub fn entangled_joint_wavefunction(
    scn: &BipartiteScenario,
    xa: f64,
    xb: f64,
    t: f64,
) -> Result<Complex64> {
    scn.require("entangled")?;
    let c = scn.normalization_factor() / SQRT_2;
    Ok((gaussian_packet(&scn.packet_a, xa, t) + gaussian_packet(&scn.packet_b, xb, t)) * c)
}

/// Phase difference `theta_t` between the two packets at `(x_a, x_b)`.
pub fn interference_phase(scn: &BipartiteScenario, xa: f64, xb: f64, t: f64) -> f64 {
    gaussian_phase(&scn.packet_a, xa, t) - gaussian_phase(&scn.packet_b, xb, t)
}

/// `(N^2 / 2) [rho_A + rho_B + 2 sqrt(rho_A rho_B) cos theta_t]`.
pub fn entangled_joint_density(scn: &BipartiteScenario, xa: f64, xb: f64, t: f64) -> Result<f64> {
    scn.require("entangled")?;
    let ra = gaussian_density(&scn.packet_a, xa, t);
    let rb = gaussian_density(&scn.packet_b, xb, t);
    let n2 = scn.normalization_factor().powi(2);
    let cross = 2.0 * (ra * rb).sqrt() * interference_phase(scn, xa, xb, t).cos();
    Ok(0.5 * n2 * (ra + rb + cross))
}

/// The interference-free part `(N^2 / 2) [rho_A + rho_B]`, valid for both
/// packet scenarios.
pub fn no_interference_density(scn: &BipartiteScenario, xa: f64, xb: f64, t: f64) -> Result<f64> {
    scn.require_packets()?;
    let ra = gaussian_density(&scn.packet_a, xa, t);
    let rb = gaussian_density(&scn.packet_b, xb, t);
    Ok(0.5 * scn.normalization_factor().powi(2) * (ra + rb))
}

/// Classical mixture of the two packets: the entangled density without its
/// cross term.
pub fn mixed_joint_density(scn: &BipartiteScenario, xa: f64, xb: f64, t: f64) -> Result<f64> {
    scn.require("mixture")?;
    no_interference_density(scn, xa, xb, t)
}

/// Box-normalized two-branch plane-wave state at time `t`, with `E = p^2/2m`.
pub fn planewave_state(scn: &BipartiteScenario, xa: f64, xb: f64, t: f64) -> Result<Complex64> {
    let ScenarioKind::PlaneWave { momenta, z } = scn.kind else {
        return Err(Error::WrongScenarioKind {
            expected: "plane_wave",
            found: scn.kind.name(),
        });
    };
    let hbar = scn.hbar();
    let (ma, mb) = scn.masses();
    let e = |p: f64, m: f64| p * p / (2.0 * m);
    let e1 = e(momenta.p_a1, ma) + e(momenta.p_b1, mb);
    let e2 = e(momenta.p_a2, ma) + e(momenta.p_b2, mb);
    let b1 = Complex64::from_polar(1.0, (momenta.p_a1 * xa + momenta.p_b1 * xb - e1 * t) / hbar);
    let b2 = Complex64::from_polar(1.0, (momenta.p_a2 * xa + momenta.p_b2 * xb - e2 * t) / hbar);
    Ok((b1 + b2) / (2.0 * z).sqrt())
}

/// `(1 / Z) (1 + cos theta')` for the plane-wave state.
pub fn planewave_density(scn: &BipartiteScenario, xa: f64, xb: f64, t: f64) -> Result<f64> {
    let ScenarioKind::PlaneWave { momenta, z } = scn.kind else {
        return Err(Error::WrongScenarioKind {
            expected: "plane_wave",
            found: scn.kind.name(),
        });
    };
    let hbar = scn.hbar();
    let (ma, mb) = scn.masses();
    let e = |p: f64, m: f64| p * p / (2.0 * m);
    let de = e(momenta.p_a1, ma) + e(momenta.p_b1, mb) - e(momenta.p_a2, ma) - e(momenta.p_b2, mb);
    let theta =
        ((momenta.p_a1 - momenta.p_a2) * xa + (momenta.p_b1 - momenta.p_b2) * xb - de * t) / hbar;
    Ok((1.0 + theta.cos()) / z)
}

/// One Gaussian packet sampled on a one-axis grid (not renormalized).
pub fn packet_field(params: &PacketParams, grid: SpatialGrid, t: f64) -> Result<WaveField> {
    WaveField::from_fn_1d(grid, |x| gaussian_packet(params, x, t))
}

/// The two branches `c psi_A(x_a) 1(x_b)` and `c 1(x_a) psi_B(x_b)` of the
/// entangled state, with `c` chosen so their sum has unit norm on the box.
pub fn entangled_branches(scn: &BipartiteScenario, t: f64) -> Result<[WaveField; 2]> {
    scn.require_packets()?;
    let g = scn.grid;
    let ba = WaveField::from_fn_2d(g, |xa, _| gaussian_packet(&scn.packet_a, xa, t))?;
    let bb = WaveField::from_fn_2d(g, |_, xb| gaussian_packet(&scn.packet_b, xb, t))?;
    let norm = ba.add(&bb)?.norm_sqr().sqrt();
    if norm.is_nan() || norm <= 0.0 {
        return Err(Error::NullField);
    }
    let c = Complex64::new(1.0 / norm, 0.0);
    Ok([ba.scale(c), bb.scale(c)])
}

/// The entangled state sampled on the scenario grid, unit norm on the box.
pub fn entangled_field(scn: &BipartiteScenario, t: f64) -> Result<WaveField> {
    scn.require("entangled")?;
    WaveField::from_fn_2d(scn.grid, |xa, xb| {
        entangled_joint_wavefunction(scn, xa, xb, t).expect("kind checked")
    })?
    .normalize()
}

/// Equal-weight ensemble of the two normalized branches.
pub fn mixture_ensemble(scn: &BipartiteScenario, t: f64) -> Result<Vec<(f64, WaveField)>> {
    scn.require_packets()?;
    let g = scn.grid;
    let ba =
        WaveField::from_fn_2d(g, |xa, _| gaussian_packet(&scn.packet_a, xa, t))?.normalize()?;
    let bb =
        WaveField::from_fn_2d(g, |_, xb| gaussian_packet(&scn.packet_b, xb, t))?.normalize()?;
    Ok(vec![(0.5, ba), (0.5, bb)])
}

pub fn entangled_density_field(scn: &BipartiteScenario, t: f64) -> Result<DensityField> {
    scn.require("entangled")?;
    DensityField::from_fn_2d(scn.grid, |xa, xb| {
        entangled_joint_density(scn, xa, xb, t).expect("kind checked")
    })?
    .normalize()
}

pub fn mixture_density_field(scn: &BipartiteScenario, t: f64) -> Result<DensityField> {
    scn.require("mixture")?;
    DensityField::from_fn_2d(scn.grid, |xa, xb| {
        no_interference_density(scn, xa, xb, t).expect("kind checked")
    })?
    .normalize()
}

pub fn planewave_field(scn: &BipartiteScenario, t: f64) -> Result<WaveField> {
    scn.require("plane_wave")?;
    WaveField::from_fn_2d(scn.grid, |xa, xb| {
        planewave_state(scn, xa, xb, t).expect("kind checked")
    })
}

/// Smallest box half width holding both packets until time `t`.
pub fn default_half_width(a: &PacketParams, b: &PacketParams, t: f64) -> f64 {
    a.half_width_until(t).max(b.half_width_until(t))
}

/// Width ratio `beta_t / beta` for a packet of fixed width `beta` as `hbar`
/// varies (with `alpha = beta / hbar`); tends to 1 in the classical limit.
pub fn classical_limit_width_ratio(mass: f64, beta: f64, hbar: f64, t: f64) -> Result<f64> {
    let p = PacketParams::with_width(mass, hbar, beta, 0.0)?;
    Ok(p.beta_at(t) / beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fig_pair() -> (PacketParams, PacketParams) {
        figure_pair(1.0, 1.0).unwrap()
    }

    #[test]
    fn derived_parameters() {
        let p = PacketParams::new(2.0, 0.5, 3.0, 1.0).unwrap();
        assert_eq!(p.beta(), 1.5);
        assert_eq!(p.tau(), 2.0 * 0.5 * 3.0 * 3.0);
        assert!(PacketParams::new(0.0, 1.0, 1.0, 0.0).is_err());
        assert!(PacketParams::new(1.0, -1.0, 1.0, 0.0).is_err());
        assert!(PacketParams::new(1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn figure_pair_matches_caption() {
        let (a, b) = fig_pair();
        assert!((a.alpha() * a.p0() - 2.0 * SQRT_2).abs() < 1e-12);
        assert!((a.beta() - 1.0 / (2.0 * SQRT_2)).abs() < 1e-15);
        assert_eq!(b.mass(), 2.0 * a.mass());
        assert!((a.tau() - b.tau()).abs() < 1e-15);
    }

    #[test]
    fn peak_amplitude_at_rest() {
        let p = PacketParams::new(1.3, 0.7, 0.9, 0.0).unwrap();
        let v = gaussian_packet(&p, 0.0, 0.0);
        let expected = 1.0 / (PI.sqrt() * p.beta()).sqrt();
        assert!((v.re - expected).abs() < 1e-14);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn peak_rides_classical_trajectory() {
        let (a, _) = fig_pair();
        for t in [0.0, 0.1, 0.7, 2.5] {
            let v = gaussian_packet(&a, a.center(t), t);
            let expected = PI.powf(-0.25) / a.beta_at(t).sqrt();
            assert!((v.norm() - expected).abs() < 1e-13, "t={t}");
        }
    }

    #[test]
    fn modulus_matches_density_on_random_samples() {
        let (a, _) = fig_pair();
        let other = PacketParams::new(0.6, 1.7, 0.4, -2.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            for p in [&a, &other] {
                let x = rng.random_range(-5.0..15.0);
                let t = rng.random_range(-3.0..3.0);
                let lhs = gaussian_packet(p, x, t).norm_sqr();
                let rhs = gaussian_density(p, x, t);
                assert!((lhs - rhs).abs() < 1e-12, "x={x} t={t}");
            }
        }
    }

    #[test]
    fn width_at_spreading_time() {
        let p = PacketParams::new(1.0, 1.0, 0.8, 0.0).unwrap();
        assert!((p.beta_at(p.tau()) - p.beta() * SQRT_2).abs() < 1e-15);
        let ratio = gaussian_density(&p, 0.0, p.tau()) / gaussian_density(&p, 0.0, 0.0);
        assert!((ratio - 1.0 / SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn second_moment_tracks_width() {
        // Fine-grid quadrature of the second central moment against beta_t^2 / 2.
        let p = PacketParams::new(1.0, 1.0, 1.0, 1.5).unwrap();
        for t in [0.0, 0.5, 2.0] {
            let bt = p.beta_at(t);
            let c = p.center(t);
            let g = SpatialGrid::one_d(c.abs() + 12.0 * bt, 4096).unwrap();
            let dx = g.spacing();
            let m2: f64 = g
                .nodes()
                .iter()
                .map(|&x| (x - c).powi(2) * gaussian_density(&p, x, t))
                .sum::<f64>()
                * dx;
            assert!((m2 / (bt * bt / 2.0) - 1.0).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn classical_limit_freezes_width() {
        let mut last = f64::INFINITY;
        for hbar in [1.0, 1e-1, 1e-2, 1e-3, 1e-4] {
            let r = classical_limit_width_ratio(1.0, 0.5, hbar, 3.0).unwrap();
            // beta_t / beta - 1 ~ (t hbar / m beta^2)^2 / 2
            let bound = 0.5 * (3.0 * hbar / 0.25f64).powi(2);
            assert!(r - 1.0 <= bound * (1.0 + 1e-9));
            assert!(r <= last);
            last = r;
        }
        assert!(last - 1.0 < 1e-6);
    }

    #[test]
    fn normalization_factor_for_figure_pair() {
        let (a, b) = fig_pair();
        let g = SpatialGrid::two_d(10.0, 16).unwrap();
        let scn = BipartiteScenario::entangled(a, b, g).unwrap();
        let expected = 1.0 / (1.0 + (-2.0f64).exp()).sqrt();
        assert!((scn.normalization_factor() - expected).abs() < 1e-15);
        assert!((scn.normalization_factor() - 0.938_507_9).abs() < 1e-7);
    }

    #[test]
    fn joint_amplitude_direct_evaluation() {
        // Both packets at rest with equal widths: the amplitude at the origin
        // is (N / sqrt 2) * 2 * (pi beta^2)^(-1/4).
        let a = PacketParams::new(1.0, 1.0, 0.6, 0.0).unwrap();
        let g = SpatialGrid::two_d(10.0, 16).unwrap();
        let scn = BipartiteScenario::entangled(a, a, g).unwrap();
        let v = entangled_joint_wavefunction(&scn, 0.0, 0.0, 0.0).unwrap();
        let n = 1.0 / SQRT_2; // alpha p0 = 0
        assert!((scn.normalization_factor() - n).abs() < 1e-15);
        let expected = n / SQRT_2 * 2.0 / (PI.sqrt() * 0.6).sqrt();
        assert!((v - Complex64::new(expected, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn joint_modulus_matches_joint_density() {
        let (a, b) = fig_pair();
        let g = SpatialGrid::two_d(30.0, 16).unwrap();
        let scenarios = [
            BipartiteScenario::entangled(a, b, g).unwrap(),
            // unequal spreading times exercise the prefactor phase
            BipartiteScenario::entangled(
                PacketParams::new(1.0, 1.0, 0.7, 3.0).unwrap(),
                PacketParams::new(3.0, 1.0, 0.2, -1.0).unwrap(),
                g,
            )
            .unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for scn in &scenarios {
            for _ in 0..5000 {
                let xa = rng.random_range(-3.0..8.0);
                let xb = rng.random_range(-3.0..3.0);
                let t = rng.random_range(0.0..1.5);
                let lhs = entangled_joint_wavefunction(scn, xa, xb, t)
                    .unwrap()
                    .norm_sqr();
                let rhs = entangled_joint_density(scn, xa, xb, t).unwrap();
                assert!((lhs - rhs).abs() < 1e-12, "({xa},{xb},{t})");
            }
        }
    }

    #[test]
    fn initial_cross_term_closed_form() {
        let (a, b) = fig_pair();
        let g = SpatialGrid::two_d(10.0, 16).unwrap();
        let scn = BipartiteScenario::entangled(a, b, g).unwrap();
        let n2 = scn.normalization_factor().powi(2);
        let (ba, bb) = (a.beta(), b.beta());
        for &(xa, xb) in &[(0.0, 0.0), (0.3, -0.2), (-0.5, 0.4), (1.1, 0.05)] {
            let full = entangled_joint_density(&scn, xa, xb, 0.0).unwrap();
            let smooth = no_interference_density(&scn, xa, xb, 0.0).unwrap();
            let cross = 0.5 * n2 * 2.0 * (a.p0() * xa).cos() / (PI * ba * bb).sqrt()
                * (-xa * xa / (2.0 * ba * ba) - xb * xb / (2.0 * bb * bb)).exp();
            assert!((full - smooth - cross).abs() < 1e-13);
            assert!((interference_phase(&scn, xa, xb, 0.0) - a.p0() * xa).abs() < 1e-14);
        }
    }

    #[test]
    fn mixture_is_density_without_cross_term() {
        let (a, b) = fig_pair();
        let g = SpatialGrid::two_d(40.0, 16).unwrap();
        let ent = BipartiteScenario::entangled(a, b, g).unwrap();
        let mix = BipartiteScenario::mixture(a, b, g).unwrap();
        // far apart: packet A at x_a ~ 20, packet B near 0 => no overlap
        let t = 20.0 * a.tau();
        for &(xa, xb) in &[(60.0, 0.0), (20.0, 35.0), (-30.0, 30.0)] {
            let ra = gaussian_density(&a, xa, t);
            let rb = gaussian_density(&b, xb, t);
            if (ra * rb).sqrt() < 1e-15 {
                let d = (entangled_joint_density(&ent, xa, xb, t).unwrap()
                    - mixed_joint_density(&mix, xa, xb, t).unwrap())
                .abs();
                assert!(d < 1e-15);
            }
        }
        assert!(mixed_joint_density(&ent, 0.0, 0.0, 0.0).is_err());
        let rho = mixture_density_field(&mix, t).unwrap();
        assert!((rho.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plane_wave_requires_commensurate_momenta() {
        let a = PacketParams::new(1.0, 1.0, 1.0, 0.0).unwrap();
        let g = SpatialGrid::two_d(PI, 16).unwrap();
        let bad = PlaneWaveMomenta {
            p_a1: 1.5,
            p_a2: 2.0,
            p_b1: -1.0,
            p_b2: 0.0,
        };
        assert!(matches!(
            BipartiteScenario::plane_wave(a, a, g, bad),
            Err(Error::MomentumNotPeriodic { .. })
        ));
        let too_fast = PlaneWaveMomenta { p_a1: 8.0, ..bad };
        assert!(matches!(
            BipartiteScenario::plane_wave(a, a, g, too_fast),
            Err(Error::MomentumAboveNyquist { .. })
        ));
        let fine = PlaneWaveMomenta { p_a1: 7.0, ..bad };
        assert!(BipartiteScenario::plane_wave(a, a, g, fine).is_ok());
    }

    #[test]
    fn plane_wave_density_expansion() {
        let a = PacketParams::new(1.0, 1.0, 1.0, 0.0).unwrap();
        let g = SpatialGrid::two_d(PI, 16).unwrap();
        let mom = PlaneWaveMomenta {
            p_a1: 3.0,
            p_a2: 4.0,
            p_b1: -4.0,
            p_b2: -3.0,
        };
        let scn = BipartiteScenario::plane_wave(a, a, g, mom).unwrap();
        let ScenarioKind::PlaneWave { z, .. } = scn.kind else {
            unreachable!()
        };
        assert!((z - (2.0 * PI).powi(2)).abs() < 1e-10);
        for &(xa, xb) in &[(0.0, 0.0), (0.4, -1.2), (2.0, 3.0)] {
            let lhs = planewave_state(&scn, xa, xb, 0.0).unwrap().norm_sqr();
            let theta = -xa - xb;
            let rhs = (1.0 + f64::cos(theta)) / z;
            assert!((lhs - rhs).abs() < 1e-15);
            assert!((planewave_density(&scn, xa, xb, 0.0).unwrap() - rhs).abs() < 1e-15);
        }
        let psi = planewave_field(&scn, 0.0).unwrap();
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equal_energy_plane_wave_density_is_static() {
        let a = PacketParams::new(1.0, 1.0, 1.0, 0.0).unwrap();
        let g = SpatialGrid::two_d(PI, 16).unwrap();
        let mom = PlaneWaveMomenta {
            p_a1: 3.0,
            p_a2: 4.0,
            p_b1: -4.0,
            p_b2: -3.0,
        };
        let scn = BipartiteScenario::plane_wave(a, a, g, mom).unwrap();
        let rho0 =
            DensityField::from_fn_2d(g, |xa, xb| planewave_density(&scn, xa, xb, 0.0).unwrap())
                .unwrap();
        let mut worst: f64 = 0.0;
        for t in [0.1, 1.0, 7.3, 100.0] {
            let rho = DensityField::from_fn_2d(g, |xa, xb| {
                planewave_state(&scn, xa, xb, t).unwrap().norm_sqr()
            })
            .unwrap();
            worst = worst.max(rho.max_abs_difference(&rho0).unwrap());
        }
        assert!(worst < 1e-12);
    }

    #[test]
    fn default_box_holds_both_packets() {
        let (a, b) = fig_pair();
        let t = 20.0 * a.tau();
        let l = default_half_width(&a, &b, t);
        assert!(l > a.center(t) + 6.0 * a.beta_at(t));
        let mass_outside = statrs::function::erf::erfc((l - a.center(t)) / a.beta_at(t)) / 2.0;
        assert!(mass_outside < 1e-12);
    }
}
