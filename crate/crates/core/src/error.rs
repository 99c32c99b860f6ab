use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library reports. Each variant maps to a stable code
/// (see [`Error::code`]) so callers can tell rejections apart without
/// matching on message text.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{0} must be finite")]
    NonFinite(&'static str),

    #[error("vectors must have at least one entry")]
    EmptyVector,

    #[error("halfspace/hyperplane normal must be nonzero")]
    ZeroNormal,

    #[error("box lower bound exceeds upper bound at index {index}")]
    InvertedBox { index: usize },

    #[error("ball radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("linear system Ax = b has no solution (residual {residual:e})")]
    InconsistentSystem { residual: f64 },

    #[error("intersection needs at least one member")]
    EmptyIntersection,

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("operator is not inverse strongly monotone for any positive constant")]
    NotIsm,

    #[error("operator has no machine-checkable ism constant")]
    Uncertifiable,

    #[error("declared ism constant {declared} exceeds certified value {certified}")]
    AlphaExceedsCertified { declared: f64, certified: f64 },

    #[error("ism constant must be positive, got {0}")]
    NonPositiveAlpha(f64),

    #[error("step size {lambda} outside admissible interval (0, {upper})")]
    StepOutOfRange { lambda: f64, upper: f64 },

    #[error("no finite default step exists; supply lambda explicitly")]
    NoDefaultStep,

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("expected {expected} instances, found {found}")]
    InstanceCount { expected: usize, found: usize },

    #[error("problem must contain at least one instance")]
    NoInstances,

    #[error("schedule index {index} out of range for {count} instances")]
    ScheduleIndex { index: usize, count: usize },

    #[error("trace is empty")]
    EmptyTrace,

    #[error("trace is malformed: {0}")]
    MalformedTrace(String),

    #[error("grid search supports dimension <= 3, got {0}")]
    GridDimension(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("no grid point lies inside the set")]
    NoGridPoint,

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("unsupported document version {0:?}")]
    UnsupportedVersion(String),
}

impl Error {
    /// Stable machine-readable code, distinct per variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "E_DIMENSION",
            Error::NonFinite(_) => "E_NON_FINITE",
            Error::EmptyVector => "E_EMPTY_VECTOR",
            Error::ZeroNormal => "E_ZERO_NORMAL",
            Error::InvertedBox { .. } => "E_BOX_BOUNDS",
            Error::NonPositiveRadius(_) => "E_RADIUS",
            Error::InconsistentSystem { .. } => "E_INCONSISTENT",
            Error::EmptyIntersection => "E_EMPTY_INTERSECTION",
            Error::NotConverged { .. } => "E_NOT_CONVERGED",
            Error::NotIsm => "E_NOT_ISM",
            Error::Uncertifiable => "E_UNCERTIFIABLE",
            Error::AlphaExceedsCertified { .. } => "E_ALPHA",
            Error::NonPositiveAlpha(_) => "E_ALPHA_SIGN",
            Error::StepOutOfRange { .. } => "E_STEP_RANGE",
            Error::NoDefaultStep => "E_NO_DEFAULT_STEP",
            Error::InvalidWeights(_) => "E_WEIGHTS",
            Error::InstanceCount { .. } => "E_INSTANCE_COUNT",
            Error::NoInstances => "E_NO_INSTANCES",
            Error::ScheduleIndex { .. } => "E_SCHEDULE",
            Error::EmptyTrace => "E_EMPTY_TRACE",
            Error::MalformedTrace(_) => "E_TRACE",
            Error::GridDimension(_) => "E_GRID_DIM",
            Error::InvalidGrid(_) => "E_GRID",
            Error::NoGridPoint => "E_NO_GRID_POINT",
            Error::Schema(_) => "E_SCHEMA",
            Error::UnsupportedVersion(_) => "E_VERSION",
        }
    }
}
