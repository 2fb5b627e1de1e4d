//! Scenario configuration, the scenario runner and the verification suites
//! behind the `bipartite` binary.

pub mod config;
pub mod error;
pub mod fluct;
pub mod scenario;
pub mod verify;

pub use config::{Kind, Overrides, ScenarioConfig};
pub use error::RunError;
pub use scenario::{oscillation_metric, run_scenario, OscillationMetric, RunOutput};
pub use verify::{verify, Check, Suite};
