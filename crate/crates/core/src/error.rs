use thiserror::Error;

/// Errors raised across the Hamiltonian, encoding, simulation and optimization layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid circuit parameters: {0}")]
    InvalidParams(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("objective returned non-finite value {value} at iteration {iteration}")]
    NonFiniteObjective { iteration: usize, value: f64 },

    #[error("state too mixed to invert: estimated fidelity {fidelity:e} below floor {floor:e}")]
    DegenerateState { fidelity: f64, floor: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
