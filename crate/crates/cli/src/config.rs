//! Scenario configuration: TOML with one level of sections, presets, and
//! resolution of every defaulted value.
//!
//! Times (`dt`, `snapshots`) are in units of packet A's spreading time
//! `tau_a`. Everything else is in the physical units of `hbar` and the masses.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use bipartite_core::analytic::{default_half_width, PacketParams, PlaneWaveMomenta};
use bipartite_core::solver::EvolutionSpec;
use bipartite_core::{Masses, SpatialGrid};

use crate::error::RunError;

/// Fraction of the largest stable step used when `dt` is not given.
const DT_SAFETY: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    GaussianEntangled,
    GaussianMixture,
    PlaneWave,
    ProductControl,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::GaussianEntangled => "gaussian_entangled",
            Kind::GaussianMixture => "gaussian_mixture",
            Kind::PlaneWave => "plane_wave",
            Kind::ProductControl => "product_control",
        }
    }

    pub fn has_packets(self) -> bool {
        self != Kind::PlaneWave
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub physics: Physics,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub evolution: EvolutionConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// Defaults are the two-packet figure parameters with `hbar = m_a = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Physics {
    pub hbar: f64,
    pub mass_a: f64,
    pub mass_b: f64,
    pub alpha_a: f64,
    pub alpha_b: f64,
    pub p0_a: f64,
    pub p0_b: f64,
    /// Plane-wave branch momenta (plane_wave kind only).
    pub p_a1: Option<f64>,
    pub p_a2: Option<f64>,
    pub p_b1: Option<f64>,
    pub p_b2: Option<f64>,
}

impl Default for Physics {
    fn default() -> Self {
        let alpha_a = 1.0 / (2.0 * SQRT_2);
        Self {
            hbar: 1.0,
            mass_a: 1.0,
            mass_b: 2.0,
            alpha_a,
            alpha_b: alpha_a / SQRT_2,
            p0_a: 2.0 * SQRT_2 / alpha_a,
            p0_b: 0.0,
            p_a1: None,
            p_a2: None,
            p_b1: None,
            p_b2: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub points: usize,
    /// Box half width `L`; defaults to a box holding both packets until the
    /// last snapshot.
    pub half_width: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            points: 256,
            half_width: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionConfig {
    /// Step in units of `tau_a`.
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    /// Steps between stored frames.
    pub stride: Option<usize>,
    /// Heatmap times in units of `tau_a`; each must land on a stored frame.
    pub snapshots: Vec<f64>,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            dt: None,
            steps: None,
            stride: None,
            snapshots: vec![0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub entanglement: bool,
    pub infometrics: bool,
    pub residuals: bool,
    pub rank_threshold: f64,
    pub distance_threshold: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            entanglement: true,
            infometrics: true,
            residuals: false,
            rank_threshold: 1e-6,
            distance_threshold: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Keep every k-th node per axis in heatmaps and matrix tables.
    pub matrix_stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { matrix_stride: 1 }
    }
}

/// Command-line overrides applied on top of a file or preset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub grid_n: Option<usize>,
    pub grid_l: Option<f64>,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub stride: Option<usize>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, RunError> {
        toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.out {
            self.out = v.clone();
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.grid_n {
            self.grid.points = v;
        }
        if let Some(v) = o.grid_l {
            self.grid.half_width = Some(v);
        }
        if let Some(v) = o.dt {
            self.evolution.dt = Some(v);
        }
        if let Some(v) = o.steps {
            self.evolution.steps = Some(v);
        }
        if let Some(v) = o.stride {
            self.evolution.stride = Some(v);
        }
    }

    pub fn packet_a(&self) -> Result<PacketParams, RunError> {
        let p = &self.physics;
        PacketParams::new(p.mass_a, p.hbar, p.alpha_a, p.p0_a).map_err(field_err("physics"))
    }

    pub fn packet_b(&self) -> Result<PacketParams, RunError> {
        let p = &self.physics;
        PacketParams::new(p.mass_b, p.hbar, p.alpha_b, p.p0_b).map_err(field_err("physics"))
    }

    pub fn tau(&self) -> Result<f64, RunError> {
        Ok(self.packet_a()?.tau())
    }

    pub fn masses(&self) -> Result<Masses, RunError> {
        Masses::two(self.physics.mass_a, self.physics.mass_b).map_err(field_err("physics"))
    }

    pub fn momenta(&self) -> Result<PlaneWaveMomenta, RunError> {
        let p = &self.physics;
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| RunError::Config(format!("physics.{name}: required for plane_wave")))
        };
        Ok(PlaneWaveMomenta {
            p_a1: need(p.p_a1, "p_a1")?,
            p_a2: need(p.p_a2, "p_a2")?,
            p_b1: need(p.p_b1, "p_b1")?,
            p_b2: need(p.p_b2, "p_b2")?,
        })
    }

    pub fn grid(&self) -> Result<SpatialGrid, RunError> {
        let l = self
            .grid
            .half_width
            .ok_or_else(|| RunError::Config("grid.half_width: unresolved".into()))?;
        SpatialGrid::two_d(l, self.grid.points).map_err(field_err("grid"))
    }

    /// Fills every defaulted value and checks that snapshots land on stored
    /// frames. The result serializes to a manifest that reproduces the run.
    pub fn resolve(&self) -> Result<ScenarioConfig, RunError> {
        let mut c = self.clone();
        let tau = c.tau()?;
        let snaps = &c.evolution.snapshots;
        if snaps.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(RunError::Config(
                "evolution.snapshots: times must be finite and nonnegative".into(),
            ));
        }
        let ms = c.output.matrix_stride;
        if ms == 0
            || !c.grid.points.is_multiple_of(ms)
            || !(c.grid.points / ms).is_multiple_of(2)
            || c.grid.points / ms < 8
        {
            return Err(RunError::Config(format!(
                "output.matrix_stride: {ms} must divide grid.points into an even count of at least 8"
            )));
        }
        for (name, v) in [
            ("analysis.rank_threshold", c.analysis.rank_threshold),
            ("analysis.distance_threshold", c.analysis.distance_threshold),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(RunError::Config(format!("{name}: must be positive")));
            }
        }
        let t_last = snaps.iter().copied().fold(0.0, f64::max);

        if c.grid.half_width.is_none() {
            if !c.kind.has_packets() {
                return Err(RunError::Config(
                    "grid.half_width: required for plane_wave (momenta must be commensurate)"
                        .into(),
                ));
            }
            let horizon = match c.evolution.steps {
                Some(steps) => (steps as f64 * c.evolution.dt.unwrap_or(0.0)).max(t_last),
                None => t_last,
            };
            let l = default_half_width(&c.packet_a()?, &c.packet_b()?, horizon * tau);
            c.grid.half_width = Some(l);
        }
        let grid = c.grid()?;

        let dt_tau = match c.evolution.dt {
            Some(dt) => {
                if !(dt.is_finite() && dt > 0.0) {
                    return Err(RunError::Config("evolution.dt: must be positive".into()));
                }
                dt
            }
            None => {
                let probe = EvolutionSpec::free(c.masses()?, c.physics.hbar, 1.0, 1, 1);
                let dt_max = FRAC_PI_4 / probe.max_kinetic_phase(&grid);
                let per_tau = (tau / (DT_SAFETY * dt_max)).ceil().max(1.0);
                1.0 / per_tau
            }
        };
        c.evolution.dt = Some(dt_tau);

        let stride = match c.evolution.stride {
            Some(0) => {
                return Err(RunError::Config(
                    "evolution.stride: must be at least 1".into(),
                ))
            }
            Some(s) => s,
            None => ((1.0 / dt_tau).round() as usize).max(1),
        };
        c.evolution.stride = Some(stride);

        let steps = match c.evolution.steps {
            Some(s) => {
                if s % stride != 0 {
                    return Err(RunError::Config(format!(
                        "evolution.steps: {s} is not a multiple of stride {stride}"
                    )));
                }
                s
            }
            None => {
                let raw = (t_last / dt_tau).round() as usize;
                raw.div_ceil(stride) * stride
            }
        };
        c.evolution.steps = Some(steps);

        for &s in snaps {
            let k = s / dt_tau;
            let step = k.round() as usize;
            if (k - k.round()).abs() > 1e-6 || !step.is_multiple_of(stride) {
                return Err(RunError::Config(format!(
                    "evolution.snapshots: t = {s} is not a stored frame (dt = {dt_tau}, stride = {stride})"
                )));
            }
            if step > steps {
                return Err(RunError::Config(format!(
                    "evolution.snapshots: t = {s} lies beyond the last step"
                )));
            }
        }
        Ok(c)
    }

    /// Step count per snapshot, in config order.
    pub fn snapshot_steps(&self) -> Vec<usize> {
        let dt = self.evolution.dt.expect("resolved config");
        self.evolution
            .snapshots
            .iter()
            .map(|s| (s / dt).round() as usize)
            .collect()
    }
}

fn field_err(section: &'static str) -> impl Fn(bipartite_core::Error) -> RunError {
    move |e| RunError::Config(format!("{section}: {e}"))
}

/// Entangled two-packet figure.
pub fn fig2() -> ScenarioConfig {
    ScenarioConfig {
        kind: Kind::GaussianEntangled,
        seed: 0,
        out: PathBuf::from("out/fig2"),
        physics: Physics::default(),
        grid: GridConfig {
            points: 1024,
            half_width: None,
        },
        evolution: EvolutionConfig {
            snapshots: vec![0.0, 5.0, 10.0, 20.0],
            ..EvolutionConfig::default()
        },
        analysis: AnalysisConfig::default(),
        output: OutputConfig { matrix_stride: 2 },
    }
}

/// Same parameters as [`fig2`] as a classical mixture.
pub fn fig3() -> ScenarioConfig {
    ScenarioConfig {
        kind: Kind::GaussianMixture,
        out: PathBuf::from("out/fig3"),
        ..fig2()
    }
}

/// Product of the two figure packets; stays unentangled.
pub fn product_control() -> ScenarioConfig {
    ScenarioConfig {
        kind: Kind::ProductControl,
        out: PathBuf::from("out/product_control"),
        grid: GridConfig {
            points: 256,
            half_width: None,
        },
        evolution: EvolutionConfig {
            snapshots: vec![0.0, 2.0, 4.0],
            ..EvolutionConfig::default()
        },
        ..fig2()
    }
}

/// Equal-energy plane-wave pair on a box of half width `pi`: momenta
/// `(3, -4)` and `(4, -3)` in units of `pi hbar / L`, equal masses.
pub fn plane_wave() -> ScenarioConfig {
    ScenarioConfig {
        kind: Kind::PlaneWave,
        seed: 0,
        out: PathBuf::from("out/plane_wave"),
        physics: Physics {
            mass_b: 1.0,
            alpha_b: 1.0,
            alpha_a: 1.0,
            p0_a: 0.0,
            p_a1: Some(3.0),
            p_a2: Some(4.0),
            p_b1: Some(-4.0),
            p_b2: Some(-3.0),
            ..Physics::default()
        },
        grid: GridConfig {
            points: 32,
            half_width: Some(PI),
        },
        evolution: EvolutionConfig {
            snapshots: vec![0.0, 1.0, 2.0],
            ..EvolutionConfig::default()
        },
        analysis: AnalysisConfig::default(),
        output: OutputConfig::default(),
    }
}

pub fn preset(name: &str) -> Option<ScenarioConfig> {
    match name {
        "fig2" => Some(fig2()),
        "fig3" => Some(fig3()),
        "product_control" => Some(product_control()),
        "plane_wave" => Some(plane_wave()),
        _ => None,
    }
}
