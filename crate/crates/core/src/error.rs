use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid three-point estimate: {field} ({reason})")]
    InvalidEstimate { field: &'static str, reason: String },
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("network validation failed: {0}")]
    InvalidNetwork(String),
    #[error("unknown activity {activity} referenced by {referrer}")]
    UnknownActivity { activity: u32, referrer: String },
    #[error("invalid weights in section `{section}`: {reason}")]
    InvalidWeights { section: String, reason: String },
    #[error("preference aggregation needs at least 2 alternatives, got {0}")]
    TooFewAlternatives(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
