use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected_rows} rows x {expected_nx} points ({expected} values), got {got}")]
    Shape {
        expected_nx: usize,
        expected_rows: usize,
        expected: usize,
        got: usize,
    },

    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("gevrey weight e^Phi overflows at the Nyquist frequency (Phi = {phase})")]
    GevreyOverflow { phase: f64 },

    #[error("invalid vertical profile: {0}")]
    InvalidProfile(String),

    #[error("non-monotone time sequence: {next} does not follow {prev}")]
    NonMonotoneTime { prev: f64, next: f64 },

    #[error("non-finite value in {what} at mode index {mode}, node {node}")]
    NonFinite {
        what: &'static str,
        mode: usize,
        node: usize,
    },

    #[error("time step {dt} exceeds the stability bound {max}")]
    Cfl { dt: f64, max: f64 },

    #[error("incompatible data: {0}")]
    Incompatible(String),

    #[error("energy grew by a factor {factor:.3e} between checks at t = {t}")]
    EnergyGrowth { factor: f64, t: f64 },

    #[error("tridiagonal solve broke down at mode index {mode}")]
    Tridiagonal { mode: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("sweep member eps = {eps} failed: {source}")]
    SweepMember { eps: f64, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
