use thiserror::Error;

/// Errors raised by the diagram, embedding and verification operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid diagram point ({birth}, {death}): need death > birth >= 0 and finite coordinates")]
    InvalidPoint { birth: f64, death: f64 },

    #[error("diagram arity must be at least 1")]
    EmptyDiagram,

    #[error("arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },

    #[error("arity {arity} exceeds the brute-force limit {max}")]
    ArityTooLarge { arity: usize, max: usize },

    #[error("cannot pad a diagram of arity {arity} down to {target}")]
    PadBelowArity { arity: usize, target: usize },

    #[error("scale must be positive and finite, got {0}")]
    InvalidScale(f64),

    #[error("scale mismatch: {0} vs {1}")]
    ScaleMismatch(f64, f64),

    #[error("invalid grid key ({m}, {k}): need odd m >= 1, even k >= 4, k >= m + 3")]
    InvalidGridKey { m: i64, k: i64 },

    #[error("schedule kind mismatch: expected {expected}, found {found}")]
    WrongScheduleKind { expected: &'static str, found: &'static str },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    #[error("tail bound not reached after {0} scales")]
    TailNotReached(usize),

    #[error("argument must be non-negative, got {0}")]
    NegativeArgument(f64),

    #[error("argument {t} lies outside the declared domain [0, {frame}]")]
    OutOfDomain { t: f64, frame: f64 },

    #[error("invalid embedding spec: {0}")]
    InvalidSpec(String),

    #[error("diagram point ({birth}, {death}) lies outside the frame [0, {frame}]^2")]
    OutsideFrame { birth: f64, death: f64, frame: f64 },

    #[error("landmark count overflow")]
    CountOverflow,

    #[error("dense layout has {size} coordinates, above the cap {cap}")]
    DenseTooLarge { size: u128, cap: u128 },

    #[error("no non-injectivity witness: {0}")]
    WitnessUnavailable(String),

    #[error("invalid anchors: {0}")]
    InvalidAnchors(String),

    #[error("vector is not the image of a diagram: {0}")]
    NotAnImage(String),

    #[error("ill-conditioned reconstruction: {0}")]
    IllConditioned(String),

    #[error("probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),

    #[error("unknown check `{0}`")]
    UnknownCheck(String),

    #[error("invalid check configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
