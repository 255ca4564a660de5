use thiserror::Error;

/// Errors reported by solvers, assembly, and the study harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix/vector dimensions are inconsistent for the requested operation.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Cholesky hit a non-positive pivot: the matrix is not positive definite.
    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    /// The least-squares system does not have full column rank.
    #[error("rank-deficient system: {0}")]
    RankDeficient(String),

    /// An iterative solver ran out of its iteration budget.
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    /// A query point lies outside the mesh or the tube region.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Malformed run configuration or config file.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
