use crate::grid::Rep;
use crate::stationary::NeumannReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("expected a field in {expected:?} representation, found {found:?}")]
    Representation { expected: Rep, found: Rep },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("wavevector {0:?} is not on the dual lattice")]
    OffLattice(Vec<f64>),

    #[error("inadmissible exponent: {0}")]
    Exponent(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("Neumann series did not converge after {} iterations (contraction {:.3e})", .0.iterations, .0.contraction_estimate)]
    NonConvergence(NeumannReport),

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
