use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("convexity violated between chords {left} and {right}: slope {left_slope} > {right_slope}")]
    ConvexityViolation {
        /// Index of the left chord; chord `k` joins nodes `k-1` and `k`, with
        /// chord 0 and chord m+1 standing for the left and right end slopes.
        left: usize,
        right: usize,
        left_slope: String,
        right_slope: String,
    },
    #[error("end slope {0} lies outside the polytope")]
    SlopeOutOfPolytope(String),
    #[error("slope interval [{0}, {1}] is not inside the polytope")]
    IntervalOutOfPolytope(String, String),
    #[error("dual domains do not overlap: the envelope is empty")]
    EmptyRooftop,
    #[error("potentials live on different grids")]
    GridMismatch,
    #[error("exponent {0} is out of range")]
    BadExponent(i64),
    #[error("measure is not a probability measure (total mass {0})")]
    NotNormalized(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("potential is not in the sector of the model envelope")]
    SingularityMismatch,
    #[error("potentials are not ordered pointwise")]
    NotComparable,
    #[error("family is empty")]
    EmptyFamily,
    #[error("levels are not totally ordered")]
    LevelsNotOrdered,
    #[error("relation is not a correspondence: {0}")]
    NotTotal(String),
    #[error("space of size {0} exceeds the brute-force cap")]
    TooLarge(usize),
    #[error("invalid schedule: {0}")]
    ScheduleInvalid(String),
    #[error("reference potential is degenerate at node {0}")]
    DegenerateReference(usize),
    #[error("metric context requires positive mass")]
    ZeroMass,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
    #[error("assertion failed: {0}")]
    AssertionFailed(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
