use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A field contained NaN or infinite samples.
    #[error("non-finite value in field data")]
    NonFinite,

    /// Two fields or diffeomorphisms live on different grids.
    #[error("grid mismatch: {0} vs {1} samples")]
    GridMismatch(usize, usize),

    /// Grid sizes must be even (Nyquist convention) and at least 16.
    #[error("invalid grid size {0}: need an even n >= 16")]
    InvalidGrid(usize),

    /// Input to the second-derivative inverse was not mean-zero.
    #[error("field mean {0:e} exceeds the mean-zero tolerance 1e-12")]
    NotMeanZero(f64),

    /// Jacobian of a circle map dropped below the positivity floor.
    #[error("degenerate diffeomorphism: min jacobian {0:e}")]
    DegenerateDiffeo(f64),

    /// A flow or geodesic integration left the diffeomorphism group.
    #[error("breakdown at t = {0}")]
    Breakdown(f64),

    /// A density failed positivity or normalization.
    #[error("invalid density: {0}")]
    InvalidDensity(String),

    /// A scalar parameter was outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
