use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("admissibility check failed: {0}")]
    Admissibility(String),

    #[error("resolution {given} is too low for degree {n}; use at least {required:.1} nodes per unit length")]
    ResolutionTooLow { given: f64, required: f64, n: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("atoms {0} and {1} coincide while both carry mass; the energy is infinite")]
    CoincidentAtoms(usize, usize),

    #[error("orthonormal basis broke down at degree {degree}: {reason}")]
    BasisBreakdown { degree: usize, reason: String },

    #[error("root finder did not converge after {sweeps} sweeps; unconverged indices {indices:?}")]
    RootsNotConverged { sweeps: usize, indices: Vec<usize> },

    #[error("point {0} lies inside or on the convex hull")]
    InsideHull(String),

    #[error("equilibrium support is empty")]
    EmptySupport,

    #[error("logarithmic singularity: {0}")]
    Singular(String),

    #[error("gap search reached alpha = {alpha:.6} at resolution {resolution}; retry with a finer grid")]
    WidomSearch { alpha: f64, resolution: usize },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
