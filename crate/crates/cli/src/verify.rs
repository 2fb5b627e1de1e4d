//! Executable invariant suites with measured values against tolerances.

use std::f64::consts::PI;
use std::fmt;

use bipartite_core::analytic::{
    entangled_branches, entangled_field, figure_pair, gaussian_density, gaussian_packet,
    mixture_ensemble, packet_field, planewave_density, planewave_field, BipartiteScenario,
    PacketParams, PlaneWaveMomenta,
};
use bipartite_core::entanglement::{
    brute_force_purity, purity, reduced_density, schmidt_spectrum, separability_test, Ensemble,
    EntanglementReport, Joint, Thresholds,
};
use bipartite_core::fluctuations::{
    joint_kernel_pdf, kernel_pdf, ks_critical_1pct, ks_statistic, sample, uncertainty_product,
    uncertainty_product_exact, KernelSpec,
};
use bipartite_core::infometrics::{
    fisher_rate, functional_gradient_check, i_f_continuum, i_f_discrete, kl_divergence,
    DensityTrajectory,
};
use bipartite_core::io::{read_density_2d_long, write_density_2d_long};
use bipartite_core::solver::{
    energy, evolve, residuals, time_reverse_check, EvolutionSpec, Fault, Stepper,
};
use bipartite_core::{Axis, DensityField, Masses, SpatialGrid, WaveField};

use crate::error::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Core,
    Infometrics,
    Solver,
    Entanglement,
}

impl Suite {
    pub fn parse(s: &str) -> Option<Suite> {
        Some(match s {
            "all" => Suite::All,
            "core" => Suite::Core,
            "infometrics" => Suite::Infometrics,
            "solver" => Suite::Solver,
            "entanglement" => Suite::Entanglement,
            _ => return None,
        })
    }

    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

/// How `measured` is compared against `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Below,
    Above,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub bound: Bound,
}

impl Check {
    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::Below => self.measured < self.tolerance,
            Bound::Above => self.measured > self.tolerance,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.bound {
            Bound::Below => "<",
            Bound::Above => ">",
        };
        write!(
            f,
            "{},{},{:e},{}{:e},{}",
            self.suite,
            self.name,
            self.measured,
            op,
            self.tolerance,
            if self.passed() { "pass" } else { "FAIL" }
        )
    }
}

pub const REPORT_HEADER: &str = "suite,check,measured,tolerance,status";

struct Recorder {
    suite: &'static str,
    checks: Vec<Check>,
}

impl Recorder {
    fn below(&mut self, name: &'static str, measured: f64, tolerance: f64) {
        self.push(name, measured, tolerance, Bound::Below);
    }

    fn above(&mut self, name: &'static str, measured: f64, tolerance: f64) {
        self.push(name, measured, tolerance, Bound::Above);
    }

    fn push(&mut self, name: &'static str, measured: f64, tolerance: f64, bound: Bound) {
        // NaN fails either comparison
        self.checks.push(Check {
            suite: self.suite,
            name,
            measured,
            tolerance,
            bound,
        });
    }
}

/// Runs the selected suites. `fault` is injected into every solver call.
pub fn verify(suite: Suite, fault: Option<Fault>) -> Result<Vec<Check>, RunError> {
    let mut out = Vec::new();
    if suite.includes(Suite::Core) {
        out.extend(core_suite()?);
    }
    if suite.includes(Suite::Infometrics) {
        out.extend(infometrics_suite()?);
    }
    if suite.includes(Suite::Solver) {
        out.extend(solver_suite(fault)?);
    }
    if suite.includes(Suite::Entanglement) {
        out.extend(entanglement_suite(fault)?);
    }
    Ok(out)
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

/// Largest step count per unit time keeping the kinetic phase below its
/// bound, with a 10% margin; returns `(dt, steps)` landing exactly on `t`.
fn stable_steps(grid: &SpatialGrid, masses: Masses, hbar: f64, t: f64) -> (f64, usize) {
    let probe = EvolutionSpec::free(masses, hbar, 1.0, 1, 1);
    let dt_max = PI / 4.0 / probe.max_kinetic_phase(grid);
    let steps = (t / (0.9 * dt_max)).ceil() as usize;
    (t / steps as f64, steps)
}

fn core_suite() -> Result<Vec<Check>, RunError> {
    let mut r = Recorder {
        suite: "core",
        checks: Vec::new(),
    };
    let g = SpatialGrid::two_d(10.0, 512)?;
    r.below("grid_spacing", (g.spacing() - 0.0390625).abs(), 1e-15);

    let p = PacketParams::with_width(1.0, 1.0, 1.0, 0.5)?;
    let line = SpatialGrid::one_d(10.0, 256)?;
    let rho = DensityField::from_fn_1d(line, |x| gaussian_density(&p, x, 0.7))?;
    r.below("gaussian_quadrature_mass", (rho.mass() - 1.0).abs(), 1e-12);

    let psi = WaveField::from_fn_1d(line, |x| gaussian_packet(&p, x, 0.0) * 3.0)?;
    let unit = psi.normalize()?;
    r.below("normalize_unit_norm", (unit.norm_sqr() - 1.0).abs(), 1e-12);
    let twice = unit.clone().normalize()?;
    r.below("normalize_idempotent", twice.l2_distance(&unit)?, 1e-15);

    let (a, b) = figure_pair(1.0, 1.0)?;
    let grid = SpatialGrid::two_d(12.0, 512)?;
    let scn = BipartiteScenario::entangled(a, b, grid)?;
    let joint = entangled_field(&scn, 0.0)?.modulus_square();
    r.below(
        "modulus_square_unit_mass",
        (joint.mass() - 1.0).abs(),
        1e-12,
    );
    r.above(
        "modulus_square_nonnegative",
        joint.values().iter().copied().fold(f64::INFINITY, f64::min),
        -f64::MIN_POSITIVE,
    );
    let ma = joint.marginal(Axis::A)?;
    r.below(
        "marginal_then_integrate",
        (ma.mass() - joint.mass()).abs(),
        1e-12,
    );

    let axis = grid.axis_grid();
    let ra = DensityField::from_fn_1d(axis, |x| gaussian_density(&a, x, 0.0))?;
    let rb = DensityField::from_fn_1d(axis, |x| gaussian_density(&b, x, 0.0))?;
    let prod = DensityField::outer(&ra, &rb)?;
    r.below(
        "product_marginal_a",
        prod.marginal(Axis::A)?.max_abs_difference(&ra)?,
        1e-10,
    );
    r.below(
        "product_marginal_b",
        prod.marginal(Axis::B)?.max_abs_difference(&rb)?,
        1e-10,
    );

    let mut buf = Vec::new();
    write_density_2d_long(&mut buf, &joint)?;
    let back = read_density_2d_long(buf.as_slice(), grid)?;
    r.below(
        "csv_round_trip",
        back.max_abs_difference(&joint)?,
        f64::MIN_POSITIVE,
    );

    let k = KernelSpec::new(1.0, 1.0, 0.01)?;
    r.below(
        "kernel_exact_product",
        (uncertainty_product_exact(&k) - 0.5).abs(),
        1e-15,
    );
    let w = sample(&k, 1_000_000, 1);
    r.below(
        "kernel_sampled_product",
        rel(uncertainty_product(&k, &w)?, 0.5),
        0.01,
    );
    let w = sample(&k, 100_000, 2);
    r.below(
        "kernel_ks_statistic",
        ks_statistic(&k, &w),
        ks_critical_1pct(w.len()),
    );
    let kb = KernelSpec::new(2.0, 1.0, 0.01)?;
    let (wa, wb) = (0.03, -0.02);
    r.below(
        "kernel_joint_factorizes",
        (joint_kernel_pdf(&k, &kb, wa, wb) - kernel_pdf(&k, wa) * kernel_pdf(&kb, wb)).abs(),
        f64::MIN_POSITIVE,
    );

    let t = 1.3;
    let wide = SpatialGrid::one_d(16.0, 512)?;
    let rho_t = DensityField::from_fn_1d(wide, |x| gaussian_density(&p, x, t))?;
    let c = p.center(t);
    let m2: f64 = wide
        .nodes()
        .iter()
        .zip(rho_t.values())
        .map(|(x, r)| (x - c).powi(2) * r)
        .sum::<f64>()
        * wide.spacing();
    r.below(
        "dispersion_second_moment",
        rel(m2, p.beta_at(t).powi(2) / 2.0),
        1e-10,
    );
    let wave = WaveField::from_fn_1d(wide, |x| gaussian_packet(&p, x, t))?.modulus_square();
    r.below(
        "modulus_matches_density",
        wave.max_abs_difference(&rho_t)?,
        1e-12,
    );
    Ok(r.checks)
}

fn gaussian_trajectory(
    p: &PacketParams,
    grid: SpatialGrid,
    t_end: f64,
    frames: usize,
) -> Result<DensityTrajectory, RunError> {
    let dt = t_end / (frames - 1) as f64;
    let fields = (0..frames)
        .map(|j| DensityField::from_fn_1d(grid, |x| gaussian_density(p, x, j as f64 * dt)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DensityTrajectory::with_step(
        0.0,
        dt,
        fields,
        Masses::one(p.mass())?,
        p.hbar(),
    )?)
}

fn infometrics_suite() -> Result<Vec<Check>, RunError> {
    let mut r = Recorder {
        suite: "infometrics",
        checks: Vec::new(),
    };
    let grid = SpatialGrid::one_d(10.0, 512)?;
    let beta = 1.0;
    let g = |c: f64| {
        DensityField::from_fn_1d(grid, |x| {
            (-(x - c).powi(2) / (beta * beta)).exp() / (PI.sqrt() * beta)
        })
    };
    let (p0, p1) = (g(0.0)?, g(0.3)?);
    r.below("kl_self", kl_divergence(&p0, &p0)?.value.abs(), 1e-15);
    r.below(
        "kl_shifted_gaussians",
        rel(kl_divergence(&p0, &p1)?.value, 0.09 / (beta * beta)),
        1e-10,
    );
    r.above("kl_nonnegative", kl_divergence(&p1, &p0)?.value, 0.0);

    let m = Masses::one(1.0)?;
    let fine = SpatialGrid::one_d(8.0, 2048)?;
    let wide = DensityField::from_fn_1d(fine, |x| (-x * x).exp() / PI.sqrt())?;
    r.below(
        "fisher_gaussian_closed_form",
        rel(fisher_rate(&wide, m, 1.0)?.value, 0.5),
        1e-5,
    );

    let g2 = SpatialGrid::two_d(8.0, 256)?;
    let (a, b) = (
        PacketParams::with_width(1.0, 1.0, 1.0, 0.0)?,
        PacketParams::with_width(2.0, 1.0, 1.3, 0.0)?,
    );
    let ra = DensityField::from_fn_1d(g2.axis_grid(), |x| gaussian_density(&a, x, 0.0))?;
    let rb = DensityField::from_fn_1d(g2.axis_grid(), |x| gaussian_density(&b, x, 0.0))?;
    let joint = DensityField::outer(&ra, &rb)?;
    let sum = fisher_rate(&ra, m, 1.0)?.value + fisher_rate(&rb, Masses::one(2.0)?, 1.0)?.value;
    r.below(
        "fisher_additivity",
        rel(fisher_rate(&joint, Masses::two(1.0, 2.0)?, 1.0)?.value, sum),
        1e-8,
    );

    let rho = DensityField::from_fn_1d(SpatialGrid::one_d(6.5, 2600)?, |x| {
        (-x * x).exp() / PI.sqrt()
    })?;
    let report = functional_gradient_check(&rho, m, 1.0, 1e-2, 4, 7)?;
    r.below("gradient_check_bohm_potential", report.max_deviation, 1e-4);

    let p = PacketParams::with_width(1.0, 1.0, 1.0, 0.0)?;
    let traj = gaussian_trajectory(&p, SpatialGrid::one_d(8.0, 512)?, p.tau(), 201)?;
    let cont = i_f_continuum(&traj)?.value;
    let closed = 0.5 * p.tau() * (1.0f64).atan();
    r.below("i_f_continuum_closed_form", rel(cont, closed), 1e-3);

    let grid_mc = SpatialGrid::one_d(9.2, 768)?;
    let traj = gaussian_trajectory(&p, grid_mc, p.tau(), 21)?;
    let est = i_f_discrete(&traj, 400, 11)?;
    let cont = i_f_continuum(&traj)?.value;
    r.below(
        "i_f_discrete_vs_continuum_coarse",
        rel(est.value, cont),
        0.1,
    );
    Ok(r.checks)
}

fn solver_suite(fault: Option<Fault>) -> Result<Vec<Check>, RunError> {
    let mut r = Recorder {
        suite: "solver",
        checks: Vec::new(),
    };
    let p = PacketParams::with_width(1.0, 1.0, 1.0, 1.0)?;
    let grid = SpatialGrid::one_d(12.0, 256)?;
    let m = Masses::one(1.0)?;
    let (dt, steps) = stable_steps(&grid, m, 1.0, p.tau());
    let mut spec = EvolutionSpec::free(m, 1.0, dt, steps, steps);
    spec.fault = fault;
    let psi0 = packet_field(&p, grid, 0.0)?.normalize()?;
    let traj = evolve(&psi0, &spec)?;
    let exact = packet_field(&p, grid, p.tau())?;
    r.below(
        "analytic_gaussian_l2",
        traj.last().l2_distance(&exact)?,
        1e-8,
    );
    r.below(
        "norm_conservation",
        (traj.last().norm_sqr() - 1.0).abs(),
        1e-10,
    );
    let e0 = energy(&psi0, &spec)?;
    r.below(
        "energy_conservation",
        rel(energy(traj.last(), &spec)?, e0),
        1e-8,
    );
    r.below("time_reversal", time_reverse_check(&traj, &spec)?, 1e-8);

    // product state in 2D against two 1D evolutions
    let g2 = SpatialGrid::two_d(8.0, 64)?;
    let (a, b) = (
        PacketParams::with_width(1.0, 1.0, 1.0, 1.0)?,
        PacketParams::with_width(2.0, 1.0, 0.8, -1.0)?,
    );
    let m2 = Masses::two(1.0, 2.0)?;
    let (dt2, steps2) = stable_steps(&g2, m2, 1.0, 0.5);
    let fa = packet_field(&a, g2.axis_grid(), 0.0)?.normalize()?;
    let fb = packet_field(&b, g2.axis_grid(), 0.0)?.normalize()?;
    let mut s2 = EvolutionSpec::free(m2, 1.0, dt2, steps2, steps2);
    s2.fault = fault;
    let joint = evolve(&WaveField::outer(&fa, &fb)?, &s2)?;
    let mut sa = EvolutionSpec::free(Masses::one(1.0)?, 1.0, dt2, steps2, steps2);
    let mut sb = EvolutionSpec::free(Masses::one(2.0)?, 1.0, dt2, steps2, steps2);
    sa.fault = fault;
    sb.fault = fault;
    let outer = WaveField::outer(evolve(&fa, &sa)?.last(), evolve(&fb, &sb)?.last())?;
    let diff = joint
        .last()
        .values()
        .iter()
        .zip(outer.values())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    r.below("product_factorization", diff, 1e-9);

    // residuals on three consecutive solver frames of a packet
    let fine = SpatialGrid::one_d(8.0, 1024)?;
    let q = PacketParams::with_width(1.0, 1.0, 1.0, 1.0)?;
    let (h, _) = stable_steps(&fine, m, 1.0, 1.0);
    let mut rs = EvolutionSpec::free(m, 1.0, h, 2, 1);
    rs.fault = fault;
    let start = packet_field(&q, fine, 0.5)?.normalize()?;
    let frames = evolve(&start, &rs)?;
    let res = residuals(&frames, &rs)?;
    let worst = |f: fn(&bipartite_core::solver::ResidualNorms) -> f64| {
        res.iter().map(f).fold(0.0, f64::max)
    };
    r.below("continuity_residual", worst(|x| x.continuity), 1e-2);
    r.below(
        "hamilton_jacobi_residual",
        worst(|x| x.hamilton_jacobi),
        1e-2,
    );
    Ok(r.checks)
}

fn entanglement_suite(fault: Option<Fault>) -> Result<Vec<Check>, RunError> {
    let mut r = Recorder {
        suite: "entanglement",
        checks: Vec::new(),
    };
    let (a, b) = figure_pair(1.0, 1.0)?;
    let grid = SpatialGrid::two_d(10.0, 48)?;
    let scn = BipartiteScenario::entangled(a, b, grid)?;
    let psi = entangled_field(&scn, 0.0)?;
    let sigma = reduced_density(&psi)?;
    let p = purity(&sigma);
    r.below(
        "purity_oracle_entangled",
        (p - brute_force_purity(&psi)?).abs(),
        1e-8,
    );
    let spec_purity: f64 = schmidt_spectrum(&psi)?.iter().map(|l| l.powi(4)).sum();
    r.below(
        "spectrum_purity_consistency",
        (spec_purity - p).abs(),
        1e-10,
    );
    let d = sigma.diagnostics()?;
    r.below("reduced_hermitian", d.hermitian_error, 1e-12);
    r.below("reduced_unit_trace", (d.trace - 1.0).abs(), 1e-10);
    r.above("reduced_positive", d.min_eigenvalue, -1e-12);

    let axis = grid.axis_grid();
    let fa = packet_field(&a, axis, 0.0)?.normalize()?;
    let fb = packet_field(&b, axis, 0.0)?.normalize()?;
    let product = WaveField::outer(&fa, &fb)?;
    r.below(
        "product_purity_one",
        (purity(&reduced_density(&product)?) - 1.0).abs(),
        1e-10,
    );
    r.below(
        "purity_oracle_product",
        (purity(&reduced_density(&product)?) - brute_force_purity(&product)?).abs(),
        1e-8,
    );

    // free evolution neither creates nor destroys entanglement
    let g = SpatialGrid::two_d(12.0, 64)?;
    let m2 = Masses::two(a.mass(), b.mass())?;
    let (dt, _) = stable_steps(&g, m2, 1.0, 1.0);
    let mut spec = EvolutionSpec::free(m2, 1.0, dt, 100, 20);
    spec.fault = fault;
    let th = Thresholds::default();
    let prod = WaveField::outer(
        &packet_field(&a, g.axis_grid(), 0.0)?.normalize()?,
        &packet_field(&b, g.axis_grid(), 0.0)?.normalize()?,
    )?;
    let lambda2 = evolve(&prod, &spec)?
        .frames
        .iter()
        .map(|f| schmidt_spectrum(f).map(|s| s[1]))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    r.below("product_stays_separable", lambda2, 1e-8);
    let ent = entangled_field(&BipartiteScenario::entangled(a, b, g)?, 0.0)?;
    let measures = evolve(&ent, &spec)?
        .frames
        .iter()
        .map(|f| EntanglementReport::new(f, 0.0, th).map(|e| e.measure))
        .collect::<Result<Vec<_>, _>>()?;
    let lo = measures.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = measures.iter().copied().fold(0.0, f64::max);
    r.above("entangled_measure_positive", lo, 0.01);
    r.below("entangled_measure_constant", hi - lo, 1e-6);

    // equal-energy plane waves: stationary density, constant purity
    let pg = SpatialGrid::two_d(PI, 32)?;
    let unit = PacketParams::new(1.0, 1.0, 1.0, 0.0)?;
    let pw = BipartiteScenario::plane_wave(
        unit,
        unit,
        pg,
        PlaneWaveMomenta {
            p_a1: 3.0,
            p_a2: 4.0,
            p_b1: -4.0,
            p_b2: -3.0,
        },
    )?;
    let t = 0.37;
    let drift = pg
        .nodes()
        .iter()
        .flat_map(|&xa| pg.nodes().into_iter().map(move |xb| (xa, xb)))
        .map(|(xa, xb)| {
            Ok::<_, bipartite_core::Error>(
                (planewave_density(&pw, xa, xb, t)? - planewave_density(&pw, xa, xb, 0.0)?).abs(),
            )
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    r.below("plane_wave_stationary_analytic", drift, 1e-12);
    let w0 = planewave_field(&pw, 0.0)?;
    let (pdt, _) = stable_steps(&pg, Masses::two(1.0, 1.0)?, 1.0, 1.0);
    let mut pspec = EvolutionSpec::free(Masses::two(1.0, 1.0)?, 1.0, pdt, 50, 50);
    pspec.fault = fault;
    let mut amp = w0.values().to_vec();
    let mut stepper = Stepper::new(pg, &pspec)?;
    for _ in 0..50 {
        stepper.step(&mut amp);
    }
    let rho_t = WaveField::new(pg, amp)?.modulus_square();
    r.below(
        "plane_wave_stationary_solver",
        rho_t.max_abs_difference(&w0.modulus_square())?,
        1e-8,
    );

    // mixture: density-level test sees an inseparable density
    let mix = mixture_ensemble(&BipartiteScenario::mixture(a, b, grid)?, 0.0)?;
    let ens = Ensemble::new(mix)?;
    let verdict = separability_test(Joint::Density(&ens.density()?), th)?;
    r.above(
        "mixture_density_inseparable",
        verdict.statistic,
        th.distance,
    );
    let branches = entangled_branches(&scn, 0.0)?;
    let sum = branches[0].add(&branches[1])?;
    r.below("branches_sum_to_state", sum.l2_distance(&psi)?, 1e-12);
    Ok(r.checks)
}
