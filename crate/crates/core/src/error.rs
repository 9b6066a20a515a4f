use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("label {label} out of range (must be < {limit})")]
    LabelOutOfRange { label: u64, limit: u64 },

    #[error("inhomogeneous shot set: {0}")]
    Inhomogeneous(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("feature layout does not match the shot: {0}")]
    LayoutMismatch(String),

    #[error("empty input")]
    EmptyInput,

    #[error("singular system (alpha = {alpha}); use alpha > 0 or drop rank-deficient features")]
    Singular { alpha: f64 },

    #[error("zero total variance at time step {step}")]
    ZeroVariance { step: usize },

    #[error("class means coincide; no discrimination axis")]
    DegenerateMeans,

    #[error("infidelity reduction undefined when the baseline fidelity is 1")]
    UndefinedReduction,

    #[error("no shots with qubit {qubit} prepared in state {state}")]
    MissingConditioningClass { qubit: usize, state: usize },

    #[error("every alpha in the grid produced a singular system")]
    AllSingular,
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
