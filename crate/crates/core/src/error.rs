use thiserror::Error;

/// Errors produced by the model, estimators and simulation runner.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Estimation was requested on an empty truncated sample.
    #[error("no data: the truncated sample is empty (m = 0)")]
    NoData,

    /// The sufficient statistics cannot come from any real sample.
    #[error("inconsistent sufficient statistics: {0}")]
    Inconsistent(String),

    /// The data admit no finite srs-design estimate.
    #[error("degenerate data: {0}")]
    Degenerate(String),

    /// The requested quantity is undefined for this estimate.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// Every replication of a scenario produced an empty sample.
    #[error("scenario failed: all {0} replications produced empty samples")]
    ScenarioFailed(usize),

    /// A numerical routine did not converge.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
