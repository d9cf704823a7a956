use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A schedule was queried outside the times it is defined for.
    #[error("time {t} is outside the schedule window [{lo}, {hi}]")]
    OutOfWindow { t: i64, lo: i64, hi: i64 },

    #[error("sigma2 at time {t} is {value}, outside the bounds ({lo}, {hi}); sigma2 must be > 0")]
    VarianceBounds {
        t: i64,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// Invalid schedule construction (non-monotone boundaries, empty season table, ...).
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    /// An argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidSchedule(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
