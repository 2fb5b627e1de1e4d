use std::fmt;

use bipartite_core::Error as CoreError;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Io(std::io::Error),
    /// A numerical precondition failed (step too large, kernel unresolved,
    /// momenta off the grid).
    Numerical(CoreError),
    /// Any other core failure.
    Core(CoreError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io(_) | RunError::Core(_) => EXIT_CONFIG,
            RunError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
            RunError::Numerical(e) => write!(f, "numerical precondition failed: {e}"),
            RunError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::KineticPhaseTooLarge { .. }
            | CoreError::KernelUnresolved { .. }
            | CoreError::MomentumNotPeriodic { .. }
            | CoreError::MomentumAboveNyquist { .. }
            | CoreError::GridTooLarge { .. } => RunError::Numerical(e),
            e => RunError::Core(e),
        }
    }
}
