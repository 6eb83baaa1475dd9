use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate immersion: |u + u_xx| = {value:e} below threshold")]
    DegeneratePoint { value: f64 },

    #[error("degenerate immersion at node (i = {i}, j = {j}): |u + u_xx| = {value:e}")]
    DegenerateImmersion { i: usize, j: usize, value: f64 },

    #[error("singular coordinates: {0}")]
    SingularCoordinates(String),

    #[error("boundary data too large: sup {sup:e} exceeds smallness threshold {threshold:e}")]
    SmallnessViolated { sup: f64, threshold: f64 },

    #[error("iteration diverged: {0}")]
    Divergence(String),

    #[error("not converged after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("shooting bracket failure: {0}")]
    Bracket(String),

    #[error("semigroup exceeds {0} elements below the cutoff")]
    Cutoff(usize),

    #[error("degenerate end: radius {0:e}")]
    DegenerateEnd(f64),

    #[error("series parameters do not match")]
    Mismatch,

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("invalid grid: {0}")]
    Grid(String),
}
