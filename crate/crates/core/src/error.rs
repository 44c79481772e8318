use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GarpError {
    #[error("unit index {index} out of range for {len} units")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("inadmissible label: {0}")]
    InadmissibleLabel(String),
    #[error("unit {0} is already attached")]
    AlreadyAttached(usize),
    #[error("unit {0} is detached")]
    Detached(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty count list")]
    EmptyCounts,
    #[error("edge urn needs at least two vertices, got {0}")]
    TooFewVertices(usize),
    #[error("enumeration guard: N = {n} exceeds {max}")]
    EnumerationGuard { n: usize, max: usize },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("coincident vertex means")]
    CoincidentMeans,
    #[error("rejection sampler exhausted {0} attempts")]
    AttemptsExhausted(usize),
    #[error("no samples")]
    EmptySamples,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}
