use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value is outside the operation's domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A configured resource limit would be exceeded.
    #[error("resource limit: {what} needs {requested}, limit is {limit}{hint}")]
    Resource {
        what: &'static str,
        requested: usize,
        limit: usize,
        hint: &'static str,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Numerical state drifted beyond tolerance.
    #[error("internal consistency: {0}")]
    Consistency(String),

    #[error("QBER undefined: no conclusive events among {pulses} pulses")]
    UndefinedQber { pulses: u64 },

    /// A randomized procedure ran out of retries.
    #[error("probabilistic failure after {tries} tries (predicted success {predicted_success:.6})")]
    ProbabilisticFailure { tries: u32, predicted_success: f64 },

    /// Factoring gave up; carries the full attempt trace.
    #[error("no factors found for {}: {}", .0.n, .0.failure.map_or("no reason recorded", |f| f.describe()))]
    NoFactorsFound(Box<crate::shor::FactorizationResult>),

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
