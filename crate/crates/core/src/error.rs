//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    // Graph construction and validation.
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("duplicate vertex id {0:?}")]
    DuplicateVertex(String),
    #[error("vertex {id:?} has non-positive measure mu = {mu}")]
    NonpositiveMeasure { id: String, mu: f64 },
    #[error("edge {u:?} -- {v:?} has non-positive weight w = {w}")]
    NonpositiveWeight { u: String, v: String, w: f64 },
    #[error("self-loop at vertex {0:?}")]
    SelfLoop(String),
    #[error("duplicate edge {u:?} -- {v:?}")]
    DuplicateEdge { u: String, v: String },
    #[error("graph is disconnected: vertex {0:?} is not reachable from {1:?}")]
    Disconnected(String, String),
    #[error("unknown vertex id {0:?}")]
    UnknownVertex(String),
    #[error("function has {got} values but the graph has {expected} vertices")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value {value} at vertex {id:?}")]
    NonFiniteValue { id: String, value: f64 },
    #[error("vortex set is empty")]
    EmptyVortexSet,
    #[error("vortex {0:?} repeats but distinct vortices were requested")]
    RepeatedVortex(String),
    #[error("invalid graph JSON: {0}")]
    InvalidJson(#[from] serde_json::Error),
    #[error("solution file is missing vertex {0:?}")]
    MissingVertex(String),
    #[error("solution file names {0:?} which is not a vertex of the graph")]
    ExtraVertex(String),

    // Parameter validation.
    #[error("{name} must be positive and finite, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    // Linear algebra.
    #[error("linear solve did not reach tolerance: residual {residual:.3e} after {iterations} iterations")]
    SolveDidNotConverge { iterations: usize, residual: f64 },
    #[error("incompatible data for the mean-zero Poisson problem: integral = {integral:.3e} exceeds tolerance {tolerance:.3e}")]
    IncompatibleData { integral: f64, tolerance: f64 },
    #[error("matrix factorization failed (operator not positive definite)")]
    FactorizationFailed,
    #[error("symmetric eigensolver did not converge")]
    EigenSolverFailed,

    // Critical-coupling search.
    #[error("bracket invalid: oracle reports a solution at the lower bound lambda = {0}")]
    BracketInvalid(f64),
    #[error("solvable-set violation: solvable at lambda = {solvable} but unsolvable at larger lambda = {unsolvable}")]
    UpSetViolation { solvable: f64, unsolvable: f64 },
    #[error("upper bracket verification failed after {retries} margin doublings (last lambda = {lambda})")]
    UpperBracketFailed { retries: usize, lambda: f64 },
    #[error("inner solve diverged at lambda = {0}; the critical-coupling estimate is too low")]
    CriticalEstimateTooLow(f64),

    // Variational machinery.
    #[error("functional overflow: u0 + v reaches {max} at vertex {id:?}")]
    FunctionalOverflow { id: String, max: f64 },
    #[error("line search failed to find a descent step (step shrank to {0:.3e})")]
    LineSearchFailed(f64),
    #[error("obstacle still active at convergence ({active} vertices); lambda may not exceed the critical value")]
    ObstacleActive { active: usize },
    #[error("deformation cap of {0} sweeps reached before the path maximum became critical")]
    DeformationCapReached(usize),
    #[error("degenerate path: the maximum sits at an endpoint")]
    DegeneratePath,
    #[error("constrained minimization did not converge: {0}")]
    MinimizationFailed(String),
    #[error("solver reported {status} at lambda = {lambda}, expected a solution")]
    NoSolutionFound { status: &'static str, lambda: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
