use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {detail}")]
    InvalidParameter { name: &'static str, detail: String },

    #[error("weight window half-width {available} cannot cover lag {needed}")]
    WindowTooSmall { needed: usize, available: usize },

    #[error("multi-index order {order} exceeds the supported maximum of 3")]
    OrderTooHigh { order: usize },

    #[error("grid with {points} points per axis is too small (need at least {needed})")]
    GridTooSmall { points: usize, needed: usize },

    #[error("grid has {nodes} nodes, over the budget of {budget}")]
    MemoryBudget { nodes: usize, budget: usize },

    #[error("derivative family is missing order {order}")]
    MissingDerivative { order: usize },

    #[error("time step {dt:e} violates the stability bound {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("non-finite value at t = {time}, node {node}")]
    NonFinite { time: f64, node: usize },

    #[error("2A is not positive definite at t = {time}")]
    NotPositiveDefinite { time: f64 },

    #[error("density mass drifted by {drift:e} (relative)")]
    MassDrift { drift: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("need at least {needed} time nodes, found {found}")]
    TooFewTimeNodes { needed: usize, found: usize },

    #[error("probe pair is degenerate: distance {distance:e}")]
    DegeneratePair { distance: f64 },

    #[error("solve for player {player} failed: {source}")]
    PlayerSolve { player: usize, source: Box<Error> },

    #[error("Riccati solution blew up between t = {t_lo} and t = {t_hi}")]
    RiccatiBlowUp { t_lo: f64, t_hi: f64 },

    #[error("{what} = {value} is out of range")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("Picard iteration did not converge in {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidParameter { name, detail: detail.into() }
    }
}
