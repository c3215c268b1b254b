use thiserror::Error;

/// Errors produced by the estimators, simulators and front ends.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lag exceeds MA order (lag {lag}, order {order})")]
    LagExceedsOrder { lag: usize, order: usize },

    #[error("matrix not positive semi-definite (eigenvalue {eigenvalue:e})")]
    NotPositiveSemiDefinite { eigenvalue: f64 },

    #[error("lag out of range (lag {lag}, n {n})")]
    LagOutOfRange { lag: usize, n: usize },

    #[error("series too short for bandwidth (n {n}, M {m})")]
    SeriesTooShortForBandwidth { n: usize, m: usize },

    #[error("series too short for lag h2 (n {n}, h2 {lag})")]
    SeriesTooShortForLag { n: usize, lag: usize },

    #[error("variance estimate non-positive ({0:e})")]
    NonPositiveVariance(f64),

    #[error("bandwidth exhausts sample (b {b}, n {n})")]
    BandwidthExhaustsSample { b: usize, n: usize },

    #[error("degenerate coordinate {0}: zero sample variance")]
    DegenerateCoordinate(usize),

    #[error("non-finite value in input")]
    NonFinite,

    #[error("invalid window length {window} for series of length {n}")]
    InvalidWindow { window: usize, n: usize },

    #[error("need at least {required} replications, got {got}")]
    TooFewReplications { required: usize, got: usize },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of the numerical pipeline rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveSemiDefinite { .. }
                | Error::NonPositiveVariance(_)
                | Error::DegenerateCoordinate(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
