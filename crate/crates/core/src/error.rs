use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown unit `{0}`")]
    UnknownUnit(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("propagation diverged at step {step}")]
    Diverged { step: usize },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("interaction schedule is singular at t = {t:.6e} s")]
    SingularSchedule { t: f64 },

    #[error("invalid driving: {0}")]
    InvalidDriving(String),

    #[error("infeasible driving: {reason}")]
    Infeasible {
        reason: String,
        /// Most negative ω² sample in rad²/s², when the failure is a negative trap.
        min_omega_sq: Option<f64>,
    },

    #[error("insufficient precision: {0}")]
    Precision(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse failure classes, used for process exit codes and the C ABI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Input,
    Config,
    Diverged,
    Infeasible,
    Numerical,
    Io,
}

impl Error {
    pub fn category(&self) -> Category {
        match self {
            Error::InvalidInput(_) | Error::UnknownUnit(_) | Error::GridMismatch => Category::Input,
            Error::Config(_) => Category::Config,
            Error::Diverged { .. } => Category::Diverged,
            Error::Infeasible { .. } | Error::InvalidDriving(_) => Category::Infeasible,
            Error::NotConverged { .. } | Error::SingularSchedule { .. } | Error::Precision(_) => {
                Category::Numerical
            }
            Error::Io(_) | Error::Csv(_) => Category::Io,
        }
    }
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Input => "input",
            Category::Config => "config",
            Category::Diverged => "diverged",
            Category::Infeasible => "infeasible",
            Category::Numerical => "numerical",
            Category::Io => "io",
        }
    }

    /// Process exit status for the command-line tool.
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Input | Category::Config => 2,
            Category::Diverged => 3,
            Category::Infeasible => 4,
            Category::Numerical | Category::Io => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
