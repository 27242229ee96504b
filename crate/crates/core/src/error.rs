use thiserror::Error;

/// Errors produced by the phase-space toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QpdError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("trace deviates from one by {0:.3e}")]
    NotNormalized(f64),

    #[error("operator is not positive (minimum eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error("kernel power is ill-conditioned: max eigenvalue power {max_power:.3e} exceeds {limit:.1e}")]
    Conditioning { max_power: f64, limit: f64 },

    #[error("Fock cutoff inadequate: characteristic function modulus {boundary_modulus:.3e} at dual-grid boundary")]
    CutoffInadequate { boundary_modulus: f64 },

    #[error("quadrature too small: {0}")]
    QuadratureTooSmall(String),

    #[error("pre- and post-selected states are orthogonal (|<eta|xi>| = {overlap:.3e})")]
    OrthogonalSelection { overlap: f64 },

    #[error("step size too large: dt * rate bound = {0:.3e} (must be < 0.1)")]
    StepSize(f64),

    #[error("positivity lost at step {step}: minimum eigenvalue {min_eigenvalue:.3e}")]
    PositivityLost { step: usize, min_eigenvalue: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, QpdError>;
