use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid interval set: {0}")]
    InvalidIntervals(String),

    #[error("invalid phase shift: {0}")]
    InvalidShift(String),

    #[error("point {y} is not in the upper half-plane")]
    NotInUpperHalfPlane { y: f64 },

    #[error("measure carries mass {0} at infinity; the Cauchy transform would drop it")]
    InfinityMass(f64),

    #[error("coupling is infinite (alpha = -1)")]
    InfiniteCoupling,

    #[error("coupling constant must be nonzero")]
    ZeroCoupling,

    #[error("shift sign does not match the sign of lambda ({lambda})")]
    SignMismatch { lambda: f64 },

    #[error("sequences are not well-mixed: {0}")]
    NotWellMixed(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("model too large: {n} > cap {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
