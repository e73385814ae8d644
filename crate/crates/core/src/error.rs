use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid nonlinearity: {0}")]
    InvalidNonlinearity(String),

    /// A bracketing search could not find a sign change.
    #[error("inconsistent nonlinearity: {0}")]
    InconsistentNonlinearity(String),

    #[error("quadrature did not reach tolerance {requested:e} (achieved {achieved:e})")]
    Quadrature { requested: f64, achieved: f64 },

    #[error("invalid grid: {0}")]
    Grid(String),

    /// A y-shift too large for the truncated window.
    #[error("translation by {shift} exceeds the admissible bound {bound}")]
    Translation { shift: f64, bound: f64 },

    #[error("cannot project onto the constraint: {0}")]
    Projection(String),

    #[error("minimization diverged after {iterations} iterations: {reason}")]
    Divergence { iterations: usize, reason: String },

    /// The multiplier reached 1/2, so no positive speed can be extracted.
    #[error("degenerate Lagrange multiplier {0} (must be < 1/2)")]
    DegenerateMultiplier(f64),

    #[error("linear solve did not converge after {iterations} iterations")]
    LinearSolve { iterations: usize },

    #[error("analysis error: {0}")]
    Analysis(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
