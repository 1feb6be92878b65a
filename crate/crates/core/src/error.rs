use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("eigensolver did not converge after {matvecs} products (worst residual {residual:.3e}, target {target:.3e})")]
    EigenNotConverged {
        matvecs: usize,
        residual: f64,
        target: f64,
    },

    #[error("inexact projection failed at rank {rank}: {source}")]
    Projection {
        rank: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("starting point is not feasible (violation {violation:.3e})")]
    InfeasibleStart { violation: f64 },

    #[error("set does not provide {0}")]
    Unsupported(&'static str),

    #[error("linear objective is unbounded over the set")]
    Unbounded,

    #[error("armijo search exceeded {max_backtracks} backtracks (directional derivative {directional_derivative:.3e})")]
    BacktrackLimit {
        max_backtracks: usize,
        directional_derivative: f64,
    },

    #[error("monitor `{check}` violated at iteration {iteration} (slack {slack:.3e})")]
    MonitorViolation {
        check: String,
        iteration: usize,
        slack: f64,
    },

    #[error("instance format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
