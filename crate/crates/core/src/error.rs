use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("measures live on different supports")]
    SupportMismatch,
    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("kernel is not primitive; the quasi-stationary distribution may not be unique")]
    NotPrimitive,
    #[error("kernel is reducible")]
    Reducible,
    #[error("power iteration did not converge within {iterations} iterations")]
    IterationLimit { iterations: usize },
    #[error("no two-sided certificate at t0={t0}: entry ({row}, {col}) of the kernel power is zero")]
    NoCertificate { t0: u64, row: usize, col: usize },
    #[error("infimum measures over K have zero overlap for states ({x}, {y})")]
    EmptyOverlap { x: usize, y: usize },
    #[error("survival probability vanished")]
    ZeroSurvival,
    #[error("point {0:?} is not in the open domain")]
    OutsideDomain(Vec<f64>),
    #[error("numerical blow-up at step {step}")]
    NumericalBlowup { step: u64 },
    #[error("all {paths} paths were absorbed before t={t}; increase the path count or shorten t")]
    ZeroSurvivors { paths: usize, t: f64 },
    #[error("all particles absorbed during step {step}; reduce dt")]
    Extinction { step: u64 },
    #[error("conditioned laws have no common mass at this resolution; use coarser bins or a larger t0")]
    NoMinorization,
    #[error("survival from the minorizing measure is zero at t={t}")]
    FailedA2 { t: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
