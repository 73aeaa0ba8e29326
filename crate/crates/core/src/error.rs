use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {0} (expected 3 or 4)")]
    UnsupportedDimension(usize),

    #[error("level {level} out of range for a {dim}-level state")]
    LevelOutOfRange { level: usize, dim: usize },

    #[error("invalid passage: {0}")]
    InvalidPassage(String),

    #[error("divergent passage: G(t) vanishes or changes sign at t = {t} ns")]
    DivergentPassage { t: f64 },

    #[error("invalid waveform: {0}")]
    InvalidWaveform(String),

    #[error("time {t} ns outside waveform span [0, {end}] ns")]
    TimeOutOfRange { t: f64, end: f64 },

    #[error(
        "step too large: max |H| dt = {product:.4} exceeds {limit}; use a finer grid (dt <= {suggested_dt:.4} ns)"
    )]
    StepTooLarge { product: f64, limit: f64, suggested_dt: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid system model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("optimization budget must be at least 1")]
    ZeroBudget,

    #[error(
        "calibration target {target} at {time} ns not bracketed: efficiency {low_eff:.4} at omega0 = {low:.5}, {high_eff:.4} at omega0 = {high:.5}"
    )]
    CalibrationUnreachable {
        target: f64,
        time: f64,
        low: f64,
        low_eff: f64,
        high: f64,
        high_eff: f64,
    },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
