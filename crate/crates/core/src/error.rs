use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no sign change of phi in bracket [{lo}, {hi}] (endpoint signs {sign_lo}, {sign_hi})")]
    NoRootInBracket {
        lo: f64,
        hi: f64,
        sign_lo: f64,
        sign_hi: f64,
    },

    #[error("non-finite state at t = {t} (cell {cell})")]
    NonFiniteState { t: f64, cell: usize },

    #[error("implicit step did not converge at t = {t} (last update {update})")]
    NonConvergence { t: f64, update: f64 },

    #[error("maximum principle violated at t = {t}: max|v| = {max_abs_v} > bound {bound}")]
    MaxPrincipleViolation { t: f64, max_abs_v: f64, bound: f64 },

    #[error("fixed-point iteration diverged in window {window} (iterate changes {changes:?})")]
    FixedPointDivergence { window: usize, changes: Vec<f64> },

    #[error("t2 equation has no solution: psi(0) = {psi0} > 0")]
    NoSolution { psi0: f64 },

    #[error("comparison precondition unmet: min(v0 - w0) = {min_gap}")]
    PreconditionUnmet { min_gap: f64 },

    #[error("atanh undefined: |v| = {abs_v} at cell {cell}")]
    ATanhDomain { cell: usize, abs_v: f64 },

    #[error("no interface: field does not change sign")]
    NoInterface,

    #[error("{count} sign changes found, expected exactly one")]
    MultipleInterfaces { count: usize },

    #[error("time {t} outside valid range {range}")]
    InvalidTime { t: f64, range: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
