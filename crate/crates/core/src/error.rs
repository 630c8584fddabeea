use thiserror::Error;

use crate::config::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument is outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {}", join(.0))]
    InvalidConfig(Vec<Violation>),

    #[error("parse error: {0}")]
    Parse(String),

    /// A simulation invariant broke mid-run. Never expected in a correct run.
    #[error("invariant violated at slot {slot}: {detail}")]
    Invariant { slot: u64, detail: String },

    /// Caller handed in a value that breaks a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
