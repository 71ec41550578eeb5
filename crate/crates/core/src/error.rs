use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::ccbaseline::CcIteration;
use crate::hamiltonian::ScfIteration;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported feature: {0}")]
    Unsupported(String),

    #[error("singular geometry: atoms {0} and {1} coincide")]
    Singularity(usize, usize),

    #[error("ill-conditioned basis: smallest overlap eigenvalue {0:e}")]
    IllConditionedBasis(f64),

    #[error("SCF did not converge in {} cycles", .0.len())]
    ScfNotConverged(Box<Vec<ScfIteration>>),

    #[error("coupled cluster did not converge in {} iterations", .0.len())]
    CcNotConverged(Box<Vec<CcIteration>>),

    #[error("{stage} did not converge after {iterations} iterations (last change {last:e})")]
    NotConverged {
        stage: &'static str,
        iterations: usize,
        last: f64,
    },

    #[error("sector dimension {dimension} exceeds limit {limit}")]
    ResourceLimit { dimension: usize, limit: usize },

    #[error("numerical integrity: {what} = {value:e} exceeds {limit:e}")]
    NumericalIntegrity {
        what: &'static str,
        value: f64,
        limit: f64,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            Error::ScfNotConverged(_) | Error::CcNotConverged(_) | Error::NotConverged { .. }
        )
    }
}
