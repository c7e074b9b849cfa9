use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShapesError {
    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),
    #[error("point {x} outside knot range [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },
    #[error("ill-posed problem: {0}")]
    IllPosed(String),
    #[error("normal matrix is rank deficient: {0}")]
    RankDeficient(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("cannot heal knots: {0}")]
    Unhealable(String),
    #[error("unknown benchmark `{0}`")]
    UnknownBenchmark(String),
    #[error("zero-norm input: {0}")]
    ZeroNorm(String),
    #[error("malformed label `{label}`: bad {field} field")]
    Label { label: String, field: &'static str },
    #[error("no model produced a finite fitness")]
    AllModelsFailed,
    #[error("realization {index} failed: {reason}")]
    RealizationFailed { index: usize, reason: String },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error("malformed {what}: {reason}")]
    Parse { what: &'static str, reason: String },
}

pub type Result<T, E = ShapesError> = std::result::Result<T, E>;
