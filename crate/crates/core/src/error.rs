use thiserror::Error;

/// Errors raised by the model builders, propagators and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operator acts on basis `{left}` but operand acts on `{right}`")]
    BasisMismatch { left: String, right: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("coupling vector has label {actual:?}, expected {expected:?}")]
    WrongLabel {
        expected: crate::grid::CouplingLabel,
        actual: crate::grid::CouplingLabel,
    },

    #[error("excitation cutoff {0} not supported (allowed: 1, 2, 3)")]
    UnsupportedCutoff(usize),

    #[error("renormalized gap m - alpha^2 E = {gap:.3e} is too close to zero")]
    SingularGap { gap: f64 },

    #[error("step size too large: tau*|H0|*ds = {ratio:.3e} > 0.1, need at least {required} steps")]
    StepTooLarge { ratio: f64, required: usize },

    #[error("propagator lost unitarity (defect {defect:.3e})")]
    UnitarityLost { defect: f64 },

    #[error("energy {re:.6e}{im:+.6e}i is outside the continuation domain |e - alpha m| < alpha m")]
    OutsideContinuation { re: f64, im: f64 },

    #[error("iteration did not converge after {iterations} steps (last residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("fit input rejected: {0}")]
    BadFitInput(String),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
