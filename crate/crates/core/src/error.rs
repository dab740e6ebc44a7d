use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tabulated profile has non-positive total integral {0}")]
    NonPositiveIntegral(f64),

    #[error("squeezing is undefined for the delta shape (it has no width)")]
    SqueezingDelta,

    #[error("no bracket for the critical value of state {state} below the ceiling {ceiling}")]
    NoBracket { state: usize, ceiling: f64 },

    #[error("state {0} has no finite critical width (it stays bound as the width shrinks to zero)")]
    NoCriticalWidth(usize),

    #[error("state {state} is not bound in this configuration")]
    StateMissing { state: usize },

    #[error(
        "bound state {state} does not decay inside the box (tail/peak = {ratio:.3e}); enlarge the box"
    )]
    BoxTooSmall { state: usize, ratio: f64 },

    #[error("zero-range state not contained in the box: mu*rho*L_box = {0:.3} < 20")]
    ZeroRangeBox(f64),

    #[error("bound state under-resolved at the Robin boundary: mu*rho*dx = {0:.3} > 0.5; refine dx")]
    UnderResolved(f64),

    #[error("boundary leak {leak:.3e} above {limit:.1e}: the emitted wave reached the wall; enlarge L_box or shorten T")]
    BoundaryLeak { leak: f64, limit: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("schedule is asymmetric (nu' != nu); use the asymmetric retention formula")]
    AsymmetricSchedule,

    #[error("dense oracle limited to {limit} unknowns, got {n}")]
    OracleTooLarge { n: usize, limit: usize },

    #[error("run needs {points} grid points, above the ceiling of {limit}")]
    CostCeiling { points: usize, limit: usize },

    #[error("run did not pass its convergence checks: {0}")]
    NotConverged(String),

    #[error("unknown figure id `{0}`")]
    UnknownFigure(String),

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
