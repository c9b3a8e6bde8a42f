use alloc::string::String;

use thiserror::Error;

/// Errors raised by the simulator, geometry estimators and optimizer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("unknown gate kind `{0}`")]
    UnknownGate(String),

    #[error("malformed gate: {0}")]
    MalformedGate(&'static str),

    #[error("rotation angle is not finite")]
    NonFiniteAngle,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("parameter index {index} out of range for {n_params} parameters")]
    ParamOutOfRange { index: usize, n_params: usize },

    #[error("parameter {0} is not referenced by any gate")]
    UnusedParameter(usize),

    #[error("{n_qubits} qubits exceeds the dense eigensolver bound of {max}")]
    TooManyQubits { n_qubits: usize, max: usize },

    #[error("expectation value has imaginary residue {0:e}")]
    ImaginaryResidue(f64),

    #[error("circuit is not eligible for the parameter-shift rule")]
    NotShiftRuleEligible,

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("singular point: {0}")]
    SingularPoint(&'static str),

    #[error("metric is not positive definite (insufficient regularization)")]
    NotPositiveDefinite,

    #[error("unsupported combination: {0}")]
    Unsupported(&'static str),

    #[error("non-finite energy at iteration {iter}")]
    NonFiniteEnergy { iter: usize },

    #[error("optimization diverged at iteration {iter}: energy {energy} rose more than {limit} above the start")]
    Diverged { iter: usize, energy: f64, limit: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
