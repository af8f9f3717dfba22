use thiserror::Error;

/// Errors raised by the engine. Validation findings (violated cocycle
/// relations, failed identities) are reported through the report types
/// instead; these variants are for ill-posed inputs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ring mismatch: {0}")]
    RingMismatch(String),
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("complex mismatch: {0}")]
    ComplexMismatch(String),
    #[error("sign convention violation: {0}")]
    SignConventionViolation(String),
    #[error("cochain is not invariant: {0}")]
    NotInvariant(String),
    #[error("cochain is not closed: {0}")]
    NotClosed(String),
    #[error("not a cocycle: {0}")]
    NotACocycle(String),
    #[error("periods are not integral: {0}")]
    PeriodsNotIntegral(String),
    #[error("complex is not orientable: {0}")]
    NonOrientable(String),
    #[error("complex is not a pseudomanifold: {0}")]
    NotPseudomanifold(String),
    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),
    #[error("invalid loop: {0}")]
    InvalidLoop(String),
    #[error("invalid surface: {0}")]
    InvalidSurface(String),
    #[error("boundary mismatch: {0}")]
    BoundaryMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
