use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("function `{name}` expects {expected} argument(s), got {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },

    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),

    #[error("domain error evaluating `{context}` at x={x}: {message}")]
    EvalDomain {
        context: String,
        x: f64,
        message: String,
    },

    #[error("interpolation did not converge at max degree {max_degree}: tail {tail:e} > tol {tol:e}")]
    InterpolationDiverged {
        max_degree: usize,
        tail: f64,
        tol: f64,
    },

    #[error("x={x} outside the interval [{a}, {b}]")]
    OutOfDomain { x: f64, a: f64, b: f64 },

    #[error("interval mismatch: [{0}, {1}] vs [{2}, {3}]")]
    IntervalMismatch(f64, f64, f64, f64),

    #[error("leading operator coefficient p0 must be nonzero")]
    ZeroLeadingCoefficient,

    #[error("resonant linear operator: homogeneous BVP has a nontrivial solution")]
    ResonantOperator,

    #[error("singular series lift in `{0}`: zeroth coefficient vanishes on the interval")]
    SingularLift(String),

    #[error("d2 undefined: g(x, y, y') vanishes on the interval")]
    GVanishes,

    #[error("linear correction failed: {0}")]
    CorrectionFailed(String),

    #[error("march stalled: subinterval shrank to {t} (< {floor}) without meeting d_max={d_max:e} at x={x}")]
    MarchStalled { t: f64, floor: f64, d_max: f64, x: f64 },

    #[error("march hit the subinterval cap ({max}) at x={x} before covering the horizon")]
    MarchUnfinished { max: usize, x: f64 },

    #[error("empty feasible grid: every scanned parameter point failed")]
    EmptyFeasibleGrid,

    #[error("rank-deficient fit: basis reduced to {0} terms")]
    RankDeficientFit(usize),

    #[error("cubic has no positive real root")]
    NoPositiveRoot,

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
