use thiserror::Error;

use crate::solver::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} must be a power of two and at least 8")]
    GridSize(usize),
    #[error("box length must be positive and finite, got {0}")]
    BoxLength(f64),
    #[error("shape mismatch: expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("operands live on different grids")]
    GridMismatch,
    #[error("Lebesgue exponent must satisfy p >= 1, got {0}")]
    Exponent(f64),
    #[error("Sobolev index must be nonnegative, got {0}")]
    SobolevIndex(i64),
    #[error("multi-index order {0} exceeds the cap of 8")]
    MultiIndexOrder(u32),
    #[error("time must be {expected}, got {got}")]
    Time { expected: &'static str, got: f64 },
    #[error("invalid fluid parameters: {0}")]
    Params(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("vorticity has nonzero mean {mean:e} (tolerance {tol:e})")]
    Circulation { mean: f64, tol: f64 },
    #[error("field is not localized: boundary/max ratio {0:e}")]
    NotLocalized(f64),
    #[error("far-field expansion needs |xi| >= 5, got {0}")]
    FarField(f64),
    #[error("acoustic ring of radius {radius} leaves the box of half-width {half_width}")]
    RingOutsideBox { radius: f64, half_width: f64 },
    #[error("time step {dt} violates the acoustic CFL bound {bound}")]
    Cfl { dt: f64, bound: f64 },
    #[error("vacuum approach: min(1 + rho) = {min_density} at t = {t}")]
    Vacuum { min_density: f64, t: f64 },
    #[error("run aborted at t = {t}: {reason}")]
    Aborted {
        t: f64,
        reason: String,
        partial: Box<Trajectory>,
    },
    #[error("need at least {needed} uniformly spaced snapshots, got {got}")]
    TooFewSnapshots { needed: usize, got: usize },
    #[error("invalid rate series: {0}")]
    Series(String),
    #[error("config key `{key}`: {msg}")]
    Config { key: String, msg: String },
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("malformed snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }
}
