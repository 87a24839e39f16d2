use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("integrand is not finite at t = {at}")]
    NonFinite { at: f64 },
    #[error("adaptive quadrature did not converge on [{a}, {b}] (non-integrable input?)")]
    NotConverged { a: f64, b: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("argument must be non-negative, got {0}")]
    NegativeArgument(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid function: {0}")]
    InvalidFunction(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("transform exceeds the representable range at s = {at}; usable range is [0, {usable}]")]
    Overflow { at: f64, usable: f64 },
    #[error("{what} = {value} lies outside the tabulated range [0, {upper}]")]
    OutOfRange { what: &'static str, value: f64, upper: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HypothesisError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PdeError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("field has {got} values but the mesh has {expected} nodes")]
    FieldSize { expected: usize, got: usize },
    #[error(
        "eigenvalue iteration did not converge after {iterations} iterations (last Rayleigh quotient {last_rayleigh})"
    )]
    EigenNotConverged { iterations: usize, last_rayleigh: f64 },
    #[error("nonlinear solve did not converge after {iterations} iterations (gradient norm {gradient})")]
    SolveNotConverged { iterations: usize, gradient: f64 },
    #[error("nonlinearity evaluation failed at node {node}: {source}")]
    Evaluation {
        node: usize,
        #[source]
        source: TransformError,
    },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("no descent direction: J stays above the base level along t*phi1 up to t = {max_scale}")]
    NoDescentDirection { max_scale: f64 },
    #[error("solver did not converge after {iterations} iterations (last residual {residual})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("iterate lost its ordering at node {node} in iteration {iteration}")]
    OrderingViolated { node: usize, iteration: usize },
    #[error("iterate left the working range (sup norm {sup_norm})")]
    BlowUp { sup_norm: f64 },
    #[error("invalid bracket: {0}")]
    InvalidBracket(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Hypothesis(#[from] HypothesisError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("unknown catalogue entry {0:?}")]
    UnknownId(String),
    #[error("unknown parameter {name:?} for entry {id:?}")]
    UnknownParameter { id: String, name: String },
    #[error("constraint violated: {constraint} [{source_ref}]")]
    ConstraintViolated { constraint: String, source_ref: String },
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Pde(#[from] PdeError),
}

/// Crate-wide error for callers that drive several modules at once.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Hypothesis(#[from] HypothesisError),
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("problem document: {0}")]
    Document(String),
}
