use thiserror::Error;

use crate::regime::{Model, RegimeError};

#[derive(Debug, Error)]
pub enum Error {
    #[error("bad lattice geometry: {0}")]
    BadGeometry(String),
    #[error("singular weight |x|^-{0} requested on a grid that contains the origin")]
    OriginOnGrid(f64),
    #[error("Riesz order {alpha} outside (0, {dim})")]
    BadOrder { alpha: f64, dim: usize },
    #[error("operator for {expected} called with a {found} context")]
    ModelMismatch { expected: Model, found: Model },
    #[error("direct summation over {points} points exceeds the cost guard of {limit}")]
    TooLarge { points: usize, limit: usize },
    #[error("exponents violate 1/r = 1/s + alpha/N: {0}")]
    ExponentMismatch(String),
    #[error("coefficient t^{rho} evaluated at t = {t}")]
    CoefficientSingularity { t: f64, rho: f64 },
    #[error("state left the finite range at t = {t}")]
    NonFinite { t: f64 },
    #[error("need at least {needed} snapshots, found {found}")]
    InsufficientSnapshots { needed: usize, found: usize },
    #[error("field lattice does not match the frame's source lattice")]
    FrameMismatch,
    #[error("no snapshot at t = {0}")]
    MissingSnapshot(f64),
    #[error("fields live on different lattices")]
    LatticeMismatch,
    #[error("log-log fit needs positive samples; got {value} at t = {t}")]
    NonPositiveSample { t: f64, value: f64 },
    #[error("invalid evolution setup: {0}")]
    InvalidSpec(String),
    #[error("snapshot format: {0}")]
    Format(String),
    #[error(transparent)]
    Regime(#[from] RegimeError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
