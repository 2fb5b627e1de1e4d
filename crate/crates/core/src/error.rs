use thiserror::Error;

/// Errors raised by grid construction, field algebra and the numerical operators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("odd point count {0}: spectral stepping needs an even number of nodes")]
    OddPointCount(usize),

    #[error("point count {0} is too small (need at least 8)")]
    TooFewPoints(usize),

    #[error("half width must be positive and finite, got {0}")]
    NonPositiveHalfWidth(f64),

    #[error("axes must be 1 or 2, got {0}")]
    UnsupportedAxes(usize),

    #[error("null field: norm is zero or not finite")]
    NullField,

    #[error("expected a {expected}D field, got {found}D")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("value count {found} does not match grid size {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("absolute continuity violated: mass {mass:e} of p sits where q is below its floor")]
    AbsoluteContinuity { mass: f64 },

    #[error("need >= {need} frames, got {got}")]
    TooFewFrames { need: usize, got: usize },

    #[error(
        "dt/grid mismatch: kernel width {kernel_width:e} is below two grid spacings ({min_width:e})"
    )]
    KernelUnresolved { kernel_width: f64, min_width: f64 },

    #[error(
        "kinetic phase per step {phase:.4} exceeds pi/4; use a time step of at most {suggested_dt:e}"
    )]
    KineticPhaseTooLarge { phase: f64, suggested_dt: f64 },

    #[error("momentum not periodic on box: {momentum} is not an integer multiple of {quantum}")]
    MomentumNotPeriodic { momentum: f64, quantum: f64 },

    #[error("momentum {momentum} exceeds the grid Nyquist momentum {nyquist}")]
    MomentumAboveNyquist { momentum: f64, nyquist: f64 },

    #[error(
        "grid with {points} points per axis is too large for the 4D sum; use the reduced path"
    )]
    GridTooLarge { points: usize },

    #[error("need >= {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("wrong scenario kind: expected {expected}, got {found}")]
    WrongScenarioKind {
        expected: &'static str,
        found: &'static str,
    },

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
