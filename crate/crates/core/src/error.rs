use std::path::PathBuf;

use thiserror::Error;

/// Failures of the constrained least-squares chain (NNLS, LDP, LSI, LSEI).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum LsqError {
    #[error("active-set iteration limit exceeded")]
    IterationLimit,
    #[error("constraints are incompatible")]
    Infeasible,
    #[error("matrix is rank deficient")]
    RankDeficient,
    #[error("inconsistent dimensions in least-squares data")]
    Dimension,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid bounds for variable {index}: lower {lower} > upper {upper}")]
    InvalidBounds {
        index: usize,
        lower: f64,
        upper: f64,
    },
    #[error("initial guess component {index} is not finite")]
    NonFiniteInitialGuess { index: usize },
    #[error("{what} returned a non-finite value")]
    NonFiniteFunctionValue { what: &'static str },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("scaler for {what} must be finite and strictly positive (got {value})")]
    NonPositiveScaler { what: &'static str, value: f64 },
    #[error("invalid finite-difference options: {0}")]
    InvalidFdOptions(String),
    #[error("invalid solver option: {0}")]
    InvalidOption(String),
    #[error("quadratic subproblem failed: {0}")]
    Lsq(#[from] LsqError),
    #[error("quadratic subproblem unsolvable (the relaxed problem failed as well)")]
    QpUnsolvable,
    #[error("search direction is not a descent direction for the merit function (slope {slope})")]
    NotDescent { slope: f64 },
    #[error("line search failed: step fell below {min_step:e} without sufficient decrease")]
    LineSearchFailed { min_step: f64 },
    #[error("degenerate quasi-Newton step (s'Bs = {curvature:e}); update skipped")]
    DegenerateStep { curvature: f64 },
    #[error("history contains no iterate to restart from")]
    MissingHistory,
    #[error("history does not match the problem: {0}")]
    HistoryMismatch(String),
    #[error("unknown save variable `{0}`")]
    InvalidVarName(String),
    #[error("malformed history file at line {line}: {reason}")]
    FormatError { line: usize, reason: String },
    #[error("unknown series `{0}`")]
    UnknownSeries(String),
    #[error("series `{selector}` index out of range (length {len})")]
    IndexOutOfRange { selector: String, len: usize },
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("image encoding failed: {0}")]
    Image(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
    Error::io(path, source)
}
