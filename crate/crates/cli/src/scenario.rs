//! Scenario runner: builds the initial state, evolves it, analyses each
//! stored frame and writes the artifact bundle.
//!
//! States are held as branches. A coherent state is the sum of its branches;
//! an incoherent one is the weighted sum of branch densities. Each branch is
//! evolved separately, so the no-interference density `sum_i w_i |psi_i|^2`
//! is available at every frame without an analytic stand-in.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use bipartite_core::analytic::{
    entangled_branches, gaussian_density, mixture_ensemble, packet_field, planewave_field,
    BipartiteScenario, PacketParams,
};
use bipartite_core::entanglement::{
    separability_test, EntanglementReport, Joint, SeparabilityVerdict, Thresholds,
};
use bipartite_core::infometrics::fisher_rate;
use bipartite_core::io::write_density_2d_matrix;
use bipartite_core::solver::{residuals, EvolutionSpec, ResidualNorms, Stepper, Trajectory};
use bipartite_core::{DensityField, SpatialGrid, WaveField};

use crate::config::{Kind, ScenarioConfig};
use crate::error::RunError;

/// Overlap mask level relative to the peak of `sqrt(rho_a rho_b)`.
pub const OVERLAP_LEVEL: f64 = 1e-3;

/// Interference contrast over the packet-overlap region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationMetric {
    pub value: f64,
    pub overlap_nodes: usize,
    /// Set when no node passes the overlap mask; `value` is then 0.
    pub empty_overlap: bool,
}

/// `||rho - rho_ni|| / ||rho||` in L2 over the nodes where
/// `sqrt(rho_a(xa, t) rho_b(xb, t))` of the free packets exceeds
/// [`OVERLAP_LEVEL`] times its peak.
pub fn oscillation_metric(
    joint: &DensityField,
    no_interference: &DensityField,
    packet_a: &PacketParams,
    packet_b: &PacketParams,
    t: f64,
) -> Result<OscillationMetric, RunError> {
    let grid = *joint.grid();
    if grid.axes() != 2 {
        return Err(RunError::Core(bipartite_core::Error::DimensionMismatch {
            expected: 2,
            found: grid.axes(),
        }));
    }
    if *no_interference.grid() != grid {
        return Err(RunError::Core(bipartite_core::Error::GridMismatch));
    }
    let nodes = grid.nodes();
    let ga: Vec<f64> = nodes
        .iter()
        .map(|&x| gaussian_density(packet_a, x, t).sqrt())
        .collect();
    let gb: Vec<f64> = nodes
        .iter()
        .map(|&x| gaussian_density(packet_b, x, t).sqrt())
        .collect();
    let peak = ga.iter().copied().fold(0.0, f64::max) * gb.iter().copied().fold(0.0, f64::max);
    let cut = OVERLAP_LEVEL * peak;
    let n = grid.points();
    let (mut diff, mut base, mut count) = (0.0, 0.0, 0usize);
    for (i, a) in ga.iter().enumerate() {
        for (j, b) in gb.iter().enumerate() {
            if peak == 0.0 || a * b <= cut {
                continue;
            }
            let k = i * n + j;
            let r = joint.values()[k];
            diff += (r - no_interference.values()[k]).powi(2);
            base += r * r;
            count += 1;
        }
    }
    if count == 0 || base == 0.0 {
        return Ok(OscillationMetric {
            value: 0.0,
            overlap_nodes: 0,
            empty_overlap: true,
        });
    }
    Ok(OscillationMetric {
        value: (diff / base).sqrt(),
        overlap_nodes: count,
        empty_overlap: false,
    })
}

/// Packet-A peak and width measured on one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tracking {
    pub peak: f64,
    /// `sqrt(2 var)`, comparable to `beta_t`.
    pub width: f64,
    pub expected_peak: f64,
    pub expected_width: f64,
}

/// Locates the maximum of a periodic 1D profile, refined by a parabola
/// through the log of the three nodes around it, and measures
/// `sqrt(2 var)` about that point with minimum-image displacements.
pub fn track_profile(grid: &SpatialGrid, profile: &[f64]) -> (f64, f64) {
    let n = profile.len();
    let (imax, _) =
        profile.iter().enumerate().fold(
            (0, f64::MIN),
            |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
        );
    let dx = grid.spacing();
    let (l, c, r) = (
        profile[(imax + n - 1) % n],
        profile[imax],
        profile[(imax + 1) % n],
    );
    let mut peak = grid.node(imax);
    if l > 0.0 && r > 0.0 {
        let (l, c, r) = (l.ln(), c.ln(), r.ln());
        let denom = l - 2.0 * c + r;
        if denom < 0.0 {
            peak += 0.5 * dx * (l - r) / denom;
        }
    }
    let nodes = grid.nodes();
    let mass: f64 = profile.iter().sum();
    let var: f64 = nodes
        .iter()
        .zip(profile)
        .map(|(&x, &p)| grid.wrap(x - peak).powi(2) * p)
        .sum::<f64>()
        / mass;
    (grid.wrap(peak), (2.0 * var).sqrt())
}

/// One row of `frames.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub step: usize,
    pub t_tau: f64,
    pub t: f64,
    pub norm: f64,
    pub tracking: Option<Tracking>,
    pub oscillation: Option<OscillationMetric>,
    pub fisher_rate: Option<f64>,
    pub cumulative_info: Option<f64>,
}

/// Everything a run produced, for callers that inspect results in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub config: ScenarioConfig,
    pub out_dir: PathBuf,
    pub frames: Vec<FrameRecord>,
    pub entanglement: Vec<EntanglementReport>,
    /// Density-level verdicts (incoherent states only).
    pub density_verdicts: Vec<(f64, SeparabilityVerdict)>,
    pub residuals: Vec<ResidualNorms>,
    pub normalization_factor: Option<f64>,
}

struct State {
    coherent: bool,
    grid: SpatialGrid,
    branches: Vec<(f64, Vec<Complex64>)>,
}

impl State {
    fn joint_wave(&self) -> WaveField {
        let mut acc = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for (_, b) in &self.branches {
            acc.iter_mut().zip(b).for_each(|(a, v)| *a += v);
        }
        WaveField::new(self.grid, acc).expect("branch length matches grid")
    }

    fn weighted_density(&self) -> DensityField {
        let mut acc = vec![0.0; self.grid.len()];
        for (w, b) in &self.branches {
            acc.iter_mut()
                .zip(b)
                .for_each(|(a, v)| *a += w * v.norm_sqr());
        }
        DensityField::new(self.grid, acc).expect("branch length matches grid")
    }
}

fn initial_state(
    config: &ScenarioConfig,
    grid: SpatialGrid,
) -> Result<(State, Option<BipartiteScenario>), RunError> {
    let a = config.packet_a()?;
    let b = config.packet_b()?;
    let raw = |f: WaveField| f.into_values();
    Ok(match config.kind {
        Kind::GaussianEntangled => {
            let scn = BipartiteScenario::entangled(a, b, grid)?;
            let [ba, bb] = entangled_branches(&scn, 0.0)?;
            let state = State {
                coherent: true,
                grid,
                branches: vec![(1.0, raw(ba)), (1.0, raw(bb))],
            };
            (state, Some(scn))
        }
        Kind::GaussianMixture => {
            let scn = BipartiteScenario::mixture(a, b, grid)?;
            let branches = mixture_ensemble(&scn, 0.0)?
                .into_iter()
                .map(|(w, f)| (w, raw(f)))
                .collect();
            let state = State {
                coherent: false,
                grid,
                branches,
            };
            (state, Some(scn))
        }
        Kind::ProductControl => {
            let axis = grid.axis_grid();
            let psi =
                WaveField::outer(&packet_field(&a, axis, 0.0)?, &packet_field(&b, axis, 0.0)?)?
                    .normalize()?;
            let state = State {
                coherent: true,
                grid,
                branches: vec![(1.0, raw(psi))],
            };
            (state, None)
        }
        Kind::PlaneWave => {
            let scn = BipartiteScenario::plane_wave(a, b, grid, config.momenta()?)?;
            let state = State {
                coherent: true,
                grid,
                branches: vec![(1.0, raw(planewave_field(&scn, 0.0)?))],
            };
            (state, Some(scn))
        }
    })
}

/// Runs a scenario and writes its artifacts under `config.out`.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunOutput, RunError> {
    let config = config.resolve()?;
    let grid = config.grid()?;
    let tau = config.tau()?;
    let hbar = config.physics.hbar;
    let masses = config.masses()?;
    let dt_tau = config.evolution.dt.expect("resolved");
    let steps = config.evolution.steps.expect("resolved");
    let stride = config.evolution.stride.expect("resolved");
    let dt = dt_tau * tau;
    let spec = EvolutionSpec::free(masses, hbar, dt, steps, stride);
    let mut stepper = Stepper::new(grid, &spec)?;
    let (mut state, scenario) = initial_state(&config, grid)?;
    let thresholds = Thresholds {
        rank: config.analysis.rank_threshold,
        distance: config.analysis.distance_threshold,
    };
    let snapshot_steps = config.snapshot_steps();

    let out_dir = config.out.clone();
    fs::create_dir_all(&out_dir)?;
    fs::write(
        out_dir.join("manifest.toml"),
        manifest(&config, grid, dt, tau, scenario.as_ref()),
    )?;

    let residual_steppers = if config.analysis.residuals && state.coherent {
        let back = EvolutionSpec::free(masses, hbar, -dt, 1, 1);
        Some((Stepper::new(grid, &spec)?, Stepper::new(grid, &back)?))
    } else {
        None
    };
    let mut residual_steppers = residual_steppers;

    let mut frames = Vec::new();
    let mut entanglement = Vec::new();
    let mut density_verdicts = Vec::new();
    let mut residual_rows = Vec::new();
    let mut cumulative = 0.0;
    let mut last_rate: Option<(f64, f64)> = None;

    for s in (0..=steps).step_by(stride) {
        if s > 0 {
            for (_, b) in state.branches.iter_mut() {
                stepper.advance(b, stride);
            }
        }
        let t = s as f64 * dt;
        let t_tau = s as f64 * dt_tau;
        let joint_wave = state.coherent.then(|| state.joint_wave());
        let rho = match &joint_wave {
            Some(psi) => psi.modulus_square(),
            None => state.weighted_density(),
        };
        let norm = rho.mass();

        let tracking = match (config.kind, &scenario) {
            (Kind::PlaneWave, _) => None,
            _ => {
                let a = config.packet_a()?;
                let b = config.packet_b()?;
                let profile = packet_a_profile(&rho, config.kind, &b, t)?;
                let (peak, width) = track_profile(&grid.axis_grid(), &profile);
                Some(Tracking {
                    peak,
                    width,
                    expected_peak: grid.wrap(a.center(t)),
                    expected_width: a.beta_at(t),
                })
            }
        };

        let oscillation = match &scenario {
            Some(scn) if config.kind.has_packets() => Some(oscillation_metric(
                &rho,
                &state.weighted_density(),
                &scn.packet_a,
                &scn.packet_b,
                t,
            )?),
            _ => None,
        };

        let (rate, cum) = if config.analysis.infometrics {
            let r = fisher_rate(&rho, masses, hbar)?.value;
            if let Some((t0, r0)) = last_rate {
                cumulative += 0.5 * (t - t0) * (r + r0);
            }
            last_rate = Some((t, r));
            (Some(r), Some(cumulative))
        } else {
            (None, None)
        };

        let is_snapshot = snapshot_steps.contains(&s);
        if is_snapshot {
            write_snapshot(&out_dir, &rho, t_tau, config.output.matrix_stride)?;
            if config.analysis.entanglement {
                match &joint_wave {
                    Some(psi) => entanglement.push(EntanglementReport::new(psi, t, thresholds)?),
                    None => density_verdicts
                        .push((t, separability_test(Joint::Density(&rho), thresholds)?)),
                }
            }
        }

        if let (Some((fwd, back)), Some(psi)) = (residual_steppers.as_mut(), &joint_wave) {
            let mut next = psi.values().to_vec();
            fwd.step(&mut next);
            let mut prev = psi.values().to_vec();
            back.step(&mut prev);
            let traj = Trajectory {
                times: vec![t - dt, t, t + dt],
                frames: vec![
                    WaveField::new(grid, prev)?,
                    psi.clone(),
                    WaveField::new(grid, next)?,
                ],
            };
            residual_rows.extend(residuals(&traj, &spec)?);
        }

        frames.push(FrameRecord {
            step: s,
            t_tau,
            t,
            norm,
            tracking,
            oscillation,
            fisher_rate: rate,
            cumulative_info: cum,
        });
    }

    let output = RunOutput {
        normalization_factor: scenario
            .as_ref()
            .filter(|_| config.kind.has_packets())
            .map(|s| s.normalization_factor()),
        config,
        out_dir,
        frames,
        entanglement,
        density_verdicts,
        residuals: residual_rows,
    };
    write_tables(&output, tau)?;
    Ok(output)
}

/// Density profile of packet A alone: the joint-density row at the `xb` node
/// farthest from packet B, or the A marginal for a product state.
fn packet_a_profile(
    rho: &DensityField,
    kind: Kind,
    b: &PacketParams,
    t: f64,
) -> Result<Vec<f64>, RunError> {
    let grid = *rho.grid();
    if kind == Kind::ProductControl {
        return Ok(rho.marginal(bipartite_core::Axis::A)?.into_values());
    }
    let far = grid.wrap(b.center(t) + grid.half_width());
    let jb = grid.nearest_index(far);
    let n = grid.points();
    Ok((0..n).map(|ia| rho.values()[ia * n + jb]).collect())
}

fn snapshot_name(t_tau: f64) -> String {
    let r = (t_tau * 1e6).round() / 1e6;
    format!("rho_t{r}")
}

fn subsample(rho: &DensityField, stride: usize) -> Result<DensityField, RunError> {
    if stride == 1 {
        return Ok(rho.clone());
    }
    let grid = *rho.grid();
    let n = grid.points();
    let m = n / stride;
    let coarse = SpatialGrid::two_d(grid.half_width(), m)?;
    let mut values = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            values.push(rho.values()[i * stride * n + j * stride]);
        }
    }
    Ok(DensityField::new(coarse, values)?)
}

/// Plain PGM: columns run over ascending `xa`, rows over descending `xb`,
/// grey level `round(255 rho / peak)`.
pub fn write_pgm<W: Write>(mut out: W, rho: &DensityField) -> std::io::Result<()> {
    let n = rho.grid().points();
    let peak = rho.peak();
    let scale = if peak > 0.0 { 255.0 / peak } else { 0.0 };
    writeln!(out, "P2\n{n} {n}\n255")?;
    let mut line = String::new();
    for jb in (0..n).rev() {
        line.clear();
        for ia in 0..n {
            if ia > 0 {
                line.push(' ');
            }
            let g = (rho.values()[ia * n + jb] * scale)
                .round()
                .clamp(0.0, 255.0) as u8;
            line.push_str(&g.to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn write_snapshot(
    dir: &Path,
    rho: &DensityField,
    t_tau: f64,
    stride: usize,
) -> Result<(), RunError> {
    let coarse = subsample(rho, stride)?;
    let name = snapshot_name(t_tau);
    let mut pgm = BufWriter::new(File::create(dir.join(format!("{name}.pgm")))?);
    write_pgm(&mut pgm, &coarse)?;
    pgm.flush()?;
    let mut csv = BufWriter::new(File::create(dir.join(format!("{name}.csv")))?);
    write_density_2d_matrix(&mut csv, &coarse)?;
    csv.flush()?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), |v| format!("{v:e}"))
}

fn write_tables(o: &RunOutput, tau: f64) -> Result<(), RunError> {
    let dir = &o.out_dir;
    let mut f = BufWriter::new(File::create(dir.join("frames.csv"))?);
    writeln!(
        f,
        "t_tau,t,norm,peak_a,expected_peak_a,width_a,beta_t_a,oscillation_metric,overlap_empty"
    )?;
    for r in &o.frames {
        let tr = r.tracking;
        writeln!(
            f,
            "{:e},{:e},{:e},{},{},{},{},{},{}",
            r.t_tau,
            r.t,
            r.norm,
            opt(tr.map(|x| x.peak)),
            opt(tr.map(|x| x.expected_peak)),
            opt(tr.map(|x| x.width)),
            opt(tr.map(|x| x.expected_width)),
            opt(r.oscillation.map(|x| x.value)),
            r.oscillation
                .map_or("nan".into(), |x| x.empty_overlap.to_string()),
        )?;
    }
    f.flush()?;

    if o.config.analysis.infometrics {
        let mut f = BufWriter::new(File::create(dir.join("infometrics.csv"))?);
        writeln!(f, "t_tau,t,fisher_rate,cumulative_info")?;
        for r in &o.frames {
            writeln!(
                f,
                "{:e},{:e},{},{}",
                r.t_tau,
                r.t,
                opt(r.fisher_rate),
                opt(r.cumulative_info)
            )?;
        }
        f.flush()?;
    }

    if o.config.analysis.entanglement {
        let mut f = BufWriter::new(File::create(dir.join("entanglement.csv"))?);
        if o.density_verdicts.is_empty() {
            writeln!(f, "{}", EntanglementReport::csv_header())?;
            for r in &o.entanglement {
                writeln!(f, "{}", r.csv_row())?;
            }
        } else {
            writeln!(f, "t,marginal_product_distance,threshold,verdict")?;
            for (t, v) in &o.density_verdicts {
                writeln!(
                    f,
                    "{:e},{:e},{:e},{}",
                    t,
                    v.statistic,
                    v.threshold,
                    v.label()
                )?;
            }
        }
        f.flush()?;
    }

    if o.config.analysis.residuals {
        let mut f = BufWriter::new(File::create(dir.join("residuals.csv"))?);
        writeln!(f, "t_tau,t,continuity,hamilton_jacobi")?;
        for r in &o.residuals {
            writeln!(
                f,
                "{:e},{:e},{:e},{:e}",
                r.time / tau,
                r.time,
                r.continuity,
                r.hamilton_jacobi
            )?;
        }
        f.flush()?;
    }

    fs::write(dir.join("summary.txt"), summary(o))?;
    Ok(())
}

fn manifest(
    c: &ScenarioConfig,
    grid: SpatialGrid,
    dt: f64,
    tau: f64,
    scn: Option<&BipartiteScenario>,
) -> String {
    let mut s = String::from("# resolved configuration; rerun with `bipartite run <this file>`\n");
    s.push_str(&format!(
        "# tau_a = {tau:e}\n# dt = {dt:e}\n# dx = {:e}\n",
        grid.spacing()
    ));
    if let Some(scn) = scn.filter(|_| c.kind.has_packets()) {
        s.push_str(&format!(
            "# normalization_factor = {:e}\n",
            scn.normalization_factor()
        ));
    }
    s.push_str(&c.to_toml());
    s
}

fn summary(o: &RunOutput) -> String {
    let c = &o.config;
    let mut s = String::new();
    s.push_str(&format!("kind: {}\n", c.kind.name()));
    s.push_str(&format!(
        "grid: n = {}, L = {:e}; dt = {:e} tau; steps = {}; stride = {}\n",
        c.grid.points,
        c.grid.half_width.unwrap_or(f64::NAN),
        c.evolution.dt.unwrap_or(f64::NAN),
        c.evolution.steps.unwrap_or(0),
        c.evolution.stride.unwrap_or(0)
    ));
    if let Some(n) = o.normalization_factor {
        s.push_str(&format!("normalization factor (infinite line): {n:.7}\n"));
    }
    let drift = o
        .frames
        .iter()
        .map(|r| (r.norm - 1.0).abs())
        .fold(0.0, f64::max);
    s.push_str(&format!("max |norm - 1|: {drift:e}\n"));
    let tr: Vec<Tracking> = o.frames.iter().filter_map(|r| r.tracking).collect();
    if !tr.is_empty() {
        let dp = tr
            .iter()
            .map(|x| (x.peak - x.expected_peak).abs())
            .fold(0.0, f64::max);
        let dw = tr
            .iter()
            .map(|x| (x.width / x.expected_width - 1.0).abs())
            .fold(0.0, f64::max);
        s.push_str(&format!(
            "packet A: max peak offset {dp:e}, max relative width error {dw:e}\n"
        ));
    }
    let osc: Vec<f64> = o
        .frames
        .iter()
        .filter_map(|r| r.oscillation.map(|m| m.value))
        .collect();
    if !osc.is_empty() {
        let lo = osc.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = osc.iter().copied().fold(0.0, f64::max);
        s.push_str(&format!("oscillation metric: min {lo:e}, max {hi:e}\n"));
    }
    if let Some(r) = o.entanglement.last() {
        s.push_str(&format!(
            "entanglement at last snapshot: measure {:e}, lambda2 {:e}, {}\n",
            r.measure,
            r.verdict.statistic,
            r.verdict.label()
        ));
    }
    if let Some((_, v)) = o.density_verdicts.last() {
        s.push_str(&format!(
            "density verdict at last snapshot: {} (distance {:e})\nnote: {}\n",
            v.label(),
            v.statistic,
            v.caveat.unwrap_or("")
        ));
    }
    if let Some(Some(i)) = o.frames.last().map(|r| r.cumulative_info) {
        s.push_str(&format!(
            "cumulative information (trapezoid over stored frames): {i:e}\n"
        ));
    }
    if !o.residuals.is_empty() {
        let c = o.residuals.iter().map(|r| r.continuity).fold(0.0, f64::max);
        let h = o
            .residuals
            .iter()
            .map(|r| r.hamilton_jacobi)
            .fold(0.0, f64::max);
        s.push_str(&format!(
            "max residuals: continuity {c:e}, hamilton-jacobi {h:e}\n"
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use bipartite_core::analytic::{entangled_density_field, figure_pair, mixture_density_field};

    fn fig_scenarios(n: usize, l: f64) -> (BipartiteScenario, BipartiteScenario) {
        let (a, b) = figure_pair(1.0, 1.0).unwrap();
        let grid = SpatialGrid::two_d(l, n).unwrap();
        (
            BipartiteScenario::entangled(a, b, grid).unwrap(),
            BipartiteScenario::mixture(a, b, grid).unwrap(),
        )
    }

    #[test]
    fn entangled_state_oscillates_at_t0() {
        let (scn, mix) = fig_scenarios(256, 12.0);
        let rho = entangled_density_field(&scn, 0.0).unwrap();
        let ni = mixture_density_field(&mix, 0.0).unwrap();
        let m = oscillation_metric(&rho, &ni, &scn.packet_a, &scn.packet_b, 0.0).unwrap();
        assert!(!m.empty_overlap);
        assert!(m.value > 0.1, "{}", m.value);
    }

    #[test]
    fn mixture_has_zero_metric() {
        let (_, scn) = fig_scenarios(128, 12.0);
        let ni = mixture_density_field(&scn, 0.0).unwrap();
        let m = oscillation_metric(&ni, &ni, &scn.packet_a, &scn.packet_b, 3.0).unwrap();
        assert_eq!(m.value, 0.0);
        assert!(!m.empty_overlap);
    }

    #[test]
    fn packet_outside_box_flags_empty_overlap() {
        let grid = SpatialGrid::two_d(10.0, 64).unwrap();
        let a = PacketParams::new(1.0, 1.0, 0.5, 1e4).unwrap();
        let b = PacketParams::new(2.0, 1.0, 0.5, 0.0).unwrap();
        let rho = DensityField::new(grid, vec![1.0; grid.len()]).unwrap();
        let m = oscillation_metric(&rho, &rho, &a, &b, 50.0).unwrap();
        assert!(m.empty_overlap);
        assert_eq!(m.value, 0.0);
    }

    #[test]
    fn tracking_recovers_gaussian_off_node() {
        let grid = SpatialGrid::one_d(20.0, 400).unwrap();
        let (c, beta) = (3.037, 1.7);
        let profile: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&x| (-(x - c) * (x - c) / (beta * beta)).exp())
            .collect();
        let (p, w) = track_profile(&grid, &profile);
        assert!((p - c).abs() < 1e-10, "{p}");
        assert!((w / beta - 1.0).abs() < 1e-8, "{w}");
    }

    #[test]
    fn tracking_handles_wraparound() {
        let grid = SpatialGrid::one_d(5.0, 200).unwrap();
        let c = 4.9;
        let profile: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&x| (-grid.wrap(x - c).powi(2) / 0.25).exp())
            .collect();
        let (p, w) = track_profile(&grid, &profile);
        assert!((grid.wrap(p - c)).abs() < 1e-8);
        assert!((w / 0.5 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn pgm_layout() {
        let grid = SpatialGrid::two_d(1.0, 8).unwrap();
        let mut v = vec![0.0; 64];
        v[7] = 2.0; // ia = 0, jb = 7: top-left
        v[8 * 7] = 1.0; // ia = 7, jb = 0: bottom-right
        let rho = DensityField::new(grid, v).unwrap();
        let mut buf = Vec::new();
        write_pgm(&mut buf, &rho).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[..3], ["P2", "8 8", "255"]);
        assert!(lines[3].starts_with("255 0"));
        assert!(lines[10].ends_with("0 128"));
    }

    #[test]
    fn snapshot_names() {
        assert_eq!(snapshot_name(0.0), "rho_t0");
        assert_eq!(snapshot_name(5.0), "rho_t5");
        assert_eq!(snapshot_name(2.5), "rho_t2.5");
        assert_eq!(snapshot_name(0.1 + 0.2), "rho_t0.3");
    }
}
