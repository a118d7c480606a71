use thiserror::Error;

use crate::fluxlang::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("cannot estimate asymptotics of `{flux}`: {reason}; an asymptotics override is required")]
    Asymptotics { flux: String, reason: String },
    #[error("unsupported flux geometry: {0}")]
    UnsupportedGeometry(String),
    #[error("no shadow-wave table row applies: {0}")]
    NoTableRow(String),
    #[error("rarefaction construction failed: {0}")]
    Rarefaction(String),
    #[error("xi = {xi} lies outside the rarefaction fan [{lo}, {hi}]")]
    OutsideFan { xi: f64, lo: f64, hi: f64 },
    #[error("eps = {eps} is too large; the shadow fan must stay below {limit}")]
    EpsTooLarge { eps: f64, limit: f64 },
    #[error("CFL condition violated: dt*max|gamma|/dx = {courant} (max|gamma| = {max_speed})")]
    Cfl { courant: f64, max_speed: f64 },
    #[error("non-finite value in cell {cell} at t = {t}")]
    NonFinite { cell: usize, t: f64 },
    #[error("degenerate quadrature panel: {0}")]
    DegeneratePanel(String),
    #[error("snapshot does not match the expected grid: {0}")]
    GridMismatch(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
