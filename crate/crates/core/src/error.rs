use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("weak MVI certification requires an anchor solution")]
    MissingAnchor,

    #[error("problem has no known solution")]
    MissingSolution,

    #[error("no admissible step size: rho = {rho} is outside the bound {bound}")]
    InfeasibleStepsize { rho: f64, bound: f64 },

    #[error("point is not in the feasible set (distance {distance:e})")]
    InfeasiblePoint { distance: f64 },

    #[error("trajectory was produced by {found}, expected {expected}")]
    WrongAlgorithm { expected: String, found: String },

    #[error("invalid fit window: {0}")]
    InvalidWindow(String),
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
