use thiserror::Error;

use crate::lp::LpError;

/// Errors raised by the geometric primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("vector must have at least one coordinate")]
    EmptyVector,
    #[error("coordinate {index} is not finite")]
    NonFinite { index: usize },
    #[error("polytope needs at least one vertex")]
    EmptyPolytope,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("hyperplane normal must be nonzero")]
    ZeroNormal,
    #[error("projection did not converge after {iterations} iterations (gap {gap:.3e})")]
    ProjectionNonConvergence { iterations: usize, gap: f64 },
    #[error(transparent)]
    Lp(#[from] LpError),
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<(), GeometryError> {
    if expected == found {
        Ok(())
    } else {
        Err(GeometryError::DimensionMismatch { expected, found })
    }
}
