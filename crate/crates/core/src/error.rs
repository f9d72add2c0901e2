use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("insufficient depth: {0}")]
    InsufficientDepth(String),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("rational lock: orbit of 0 returned within {dist:e} at iterate {n}")]
    RationalLock { n: u64, dist: f64 },
    #[error("insufficient budget: {0}")]
    InsufficientBudget(String),
    #[error("branch ambiguity at step {index}: {detail}")]
    BranchAmbiguity { index: usize, detail: String },
    #[error("level too deep: |I_{level}| below {min_interval:e}")]
    LevelTooDeep { level: usize, min_interval: f64 },
    #[error("domain exhausted: {0}")]
    DomainExhausted(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("no admissible samples at level {0}")]
    NoAdmissibleSamples(usize),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("ray trace stalled near ({re}, {im})")]
    RayStall { re: f64, im: f64 },
    #[error("insufficient raster resolution: {0}")]
    Resolution(String),
    #[error("self-intersecting polyline: {0}")]
    SelfIntersection(String),
}

impl LabError {
    /// True for failures caused by bad input rather than by the numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            LabError::Domain(_) | LabError::Precondition(_) | LabError::InsufficientDepth(_)
        )
    }
}
