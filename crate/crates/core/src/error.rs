use thiserror::Error;

/// Errors raised by the geometry, piercing, covering and construction layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("cap radius {0} is outside the supported range (must be < pi/2)")]
    RadiusOutOfRegime(f64),

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("point too close to the projection center (angular distance {0})")]
    TooCloseToCenter(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("retry budget exhausted after {attempts} attempts: {constraint}")]
    RetryBudget { attempts: usize, constraint: String },

    #[error("covering verification failed: {0}")]
    CoverNotVerified(String),

    #[error("mesh resolution insufficient: worst margin {margin:e} is below mesh radius {mesh_radius:e}")]
    MeshResolution { margin: f64, mesh_radius: f64 },

    #[error("solver failure: {0}")]
    Solver(String),

    /// A runtime check of a proven property failed. Indicates a model or
    /// numerical bug rather than bad input.
    #[error("internal assertion failed: {0}")]
    Assertion(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
