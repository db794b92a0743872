use thiserror::Error;

/// Errors produced by graph construction, matrix assembly, spectral analysis,
/// bound evaluation, and simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("weight at index {index} is not strictly positive: {value}")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("need at least {required} nodes, got {n}")]
    TooFewNodes { n: usize, required: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("bad grid dimensions: {0}")]
    BadDimensions(String),

    #[error("edge probability must lie in (0,1), got {0}")]
    BadProbability(f64),

    #[error("geometric radius must lie in (0, sqrt(2)], got {0}")]
    BadRadius(f64),

    #[error("invalid edge ({i}, {j}) for a simple graph on {n} nodes")]
    BadEdge { i: usize, j: usize, n: usize },

    #[error("target average degree {dbar} is infeasible for n = {n}")]
    InfeasibleAverageDegree { dbar: f64, n: usize },

    #[error("degree sequence is not graphical")]
    GraphicalityFailure,

    #[error("invalid degree sequence: {0}")]
    BadDegreeSequence(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("laziness parameter must lie in (0,1), got {0}")]
    BadLaziness(f64),

    #[error("detailed balance violated: residual {residual:.3e} exceeds {limit:.1e}")]
    DetailedBalanceViolation { residual: f64, limit: f64 },

    #[error("eigensolver failed to converge")]
    EigensolverFailure,

    #[error("rho must lie in [0,1), got {0}")]
    RhoOutOfRange(f64),

    #[error("step size {alpha} too large: {constant} = {value:.6} must be positive")]
    StepTooLarge {
        alpha: f64,
        constant: &'static str,
        value: f64,
    },

    #[error("state became non-finite at step {step} (step size likely too large)")]
    NonFinite { step: usize },

    #[error("invalid parameter range: {0}")]
    BadRange(String),

    #[error("weighted system matrix is singular")]
    SingularSystem,

    #[error("failed to parse graph file: {0}")]
    ParseGraph(String),
}

pub type Result<T> = std::result::Result<T, Error>;
