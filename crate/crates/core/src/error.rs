use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the extension pipeline.
///
/// Variants fall into two families that the CLI maps to distinct exit codes:
/// malformed input (bad curves, violated preconditions) and numerical
/// failure (non-convergence, folds, correspondence drift).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("polyline self-intersects: segments {first} and {second}")]
    SelfIntersection { first: usize, second: usize },

    #[error("point on curve: {point} is within {distance:e} of the polyline")]
    PointOnCurve { point: Complex64, distance: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("curve symmetry violated: {0}")]
    Symmetry(String),

    #[error("boundary correspondence failure: {0}")]
    BoundaryCorrespondence(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("orientation fold at {at} (det = {det:e})")]
    OrientationFold { at: Complex64, det: f64 },

    #[error("monte carlo failure: {0}")]
    MonteCarlo(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the caller's data rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::SelfIntersection { .. }
                | Error::PointOnCurve { .. }
                | Error::Domain(_)
                | Error::Symmetry(_)
                | Error::Io(_)
                | Error::Json(_)
        )
    }
}
