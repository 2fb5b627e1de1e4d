//! Two-particle free Schrödinger dynamics on periodic grids, with
//! information-geometric diagnostics of the evolving density and
//! entanglement measures of the joint state.

pub mod analytic;
mod diff;
pub mod entanglement;
pub mod error;
pub mod field;
pub mod fluctuations;
pub mod grid;
pub mod infometrics;
pub mod io;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{DensityField, WaveField};
pub use grid::{Axis, Masses, SpatialGrid};
