use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{func}: argument {arg} is outside the supported domain")]
    Domain { func: &'static str, arg: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("moment {0} is undefined for this model")]
    UndefinedMoment(&'static str),

    #[error("infeasible problem: {0}")]
    Infeasible(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
