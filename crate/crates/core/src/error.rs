use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("vertex `{0}` has non-positive or non-finite measure")]
    BadMeasure(String),
    #[error("edge {x} -> {y} has non-positive or non-finite weight")]
    BadWeight { x: String, y: String },
    #[error("unknown vertex label `{0}`")]
    UnknownVertex(String),
    #[error("duplicate vertex label `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate edge {x} -- {y}")]
    DuplicateEdge { x: String, y: String },
    #[error("vertex `{0}` has an empty neighbor list")]
    EmptyNeighborhood(String),
    #[error("reversibility violated on edge {x} -- {y}: p(x,y)mu(x) = {lhs}, p(y,x)mu(y) = {rhs}")]
    Reversibility {
        x: String,
        y: String,
        lhs: f64,
        rhs: f64,
    },
    #[error("markov row sum at `{x}` is {sum}, expected 1")]
    RowSum { x: String, sum: f64 },
    #[error("graph is disconnected: `{0}` is unreachable from the root")]
    Disconnected(String),
    #[error("asserted alpha {asserted} exceeds observed minimum edge weight {observed}")]
    AlphaAssertion { asserted: f64, observed: f64 },
    #[error("empty graph")]
    Empty,
    #[error("invalid group specification: {0}")]
    InvalidGroup(String),
    #[error("truncation margin {margin} exceeds radius {radius}")]
    MarginExceedsRadius { margin: usize, radius: usize },
    #[error("vertices are not connected")]
    Unreachable,
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("function length {got} does not match vertex count {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("graph carries no Cayley generator table")]
    NotCayley,
    #[error("Cayley partial differences require unnormalized mode")]
    RequiresUnnormalized,
    #[error("generator translate of vertex {vertex} leaves the truncation")]
    LeftTruncation { vertex: usize },
    #[error("square-root identity requires a strictly positive function")]
    NonPositive,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("Jacobi eigen-solver did not converge after {sweeps} sweeps (off-diagonal norm {residual})")]
    NoConvergence { sweeps: usize, residual: f64 },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurvatureError {
    #[error("dimension parameter must be >= 1 or infinite, got {0}")]
    BadDimension(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("vertex index {0} out of range")]
    BadVertex(usize),
    #[error("trials must be >= 1")]
    NoTrials,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemigroupError {
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("time grid needs at least 3 nodes, got {0}")]
    GridTooCoarse(usize),
    #[error("forcing path has {got} samples, grid has {expected}")]
    ForcingLength { expected: usize, got: usize },
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("Picard iteration diverging: contraction ratio above 0.9 for 3 consecutive iterations")]
    Diverging,
    #[error("global extension requires ||Gamma u0|| < alpha/2 ({gamma_sup} >= {half_alpha})")]
    NotAdmissible { gamma_sup: f64, half_alpha: f64 },
    #[error("horizon {horizon} exceeds local existence time {t_local}")]
    HorizonTooLong { horizon: f64, t_local: f64 },
    #[error("grid step {step} does not divide horizon {horizon}")]
    GridMismatch { step: f64, horizon: f64 },
    #[error("step {step} too large for the oracle (limit {limit})")]
    StepTooLarge { step: f64, limit: f64 },
    #[error("solution blew up: ||u|| = {0}")]
    BlowUp(f64),
    #[error("time {0} is not a grid node")]
    NotOnGrid(f64),
    #[error("time pair requires 0 < T1 < T2 (got {t1}, {t2})")]
    BadTimePair { t1: f64, t2: f64 },
    #[error("gamma = {0} lies strictly between the proven regimes")]
    UnprovenRegime(f64),
    #[error("graph is not stochastic (absorbing truncation or unnormalized mode)")]
    NotStochastic,
    #[error(transparent)]
    Semigroup(#[from] SemigroupError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("radius {r_max} from center exceeds the trusted region")]
    UntrustedRadius { r_max: usize },
    #[error("vertex index {0} out of range")]
    BadVertex(usize),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
}
