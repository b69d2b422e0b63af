use thiserror::Error;

/// Errors returned by the solver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("pinned belief {0} lies outside the open grid range ({1}, {2})")]
    PinnedOutOfRange(f64, f64, f64),

    #[error("invalid belief {0}: {1}")]
    InvalidBelief(f64, String),

    #[error("grid functions live on different grids")]
    GridMismatch,

    #[error("negative flow cost {value} at belief {belief}")]
    NegativeCost { belief: f64, value: f64 },

    #[error("quadratic-variation rate must be positive, got {value} at belief {belief}")]
    NonPositiveQv { belief: f64, value: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid coalition rule: {0}")]
    InvalidRule(String),

    #[error("scope endpoint {0} is masked")]
    MaskedScopeEndpoint(usize),

    #[error("grid of {n} points exceeds the budget of {limit} for this search")]
    ScopeTooLarge { n: usize, limit: usize },

    #[error("unsupported process: {0}")]
    UnsupportedProcess(String),

    #[error("anchor {anchor} is on the wrong side of {threshold}")]
    WrongSide { anchor: f64, threshold: f64 },

    #[error("no fixed point on the grid; nearest candidate ({lower}, {upper}) has residual {residual} cells")]
    NoFixedPoint { lower: f64, upper: f64, residual: usize },

    #[error("union of certified equilibria fails certification (violation {violation:e})")]
    UnionNotCertified { violation: f64 },

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
