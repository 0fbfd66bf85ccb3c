use thiserror::Error;

/// Errors raised by the models, solvers and the command-line front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the formula it feeds.
    #[error("domain error: {0}")]
    Domain(String),

    /// An observed error rate lies below the floor p = 2/(r+3) that the
    /// modulator leakage alone already produces.
    #[error("noise floor violated: {what} = {value} is below p = {floor}")]
    NoiseFloor {
        what: &'static str,
        value: f64,
        floor: f64,
    },

    /// A root solve found no sign change in its bracket.
    #[error("no root: {0}")]
    NoRoot(String),

    #[error("key rate is not positive at zero distance (baseline {baseline:e}, modified {modified:e})")]
    NotPositiveAtOrigin { baseline: f64, modified: f64 },

    /// The Fock truncation discards more weight than the allowed tail.
    #[error("fock cutoff {cutoff} too small: discarded tail {tail:e} exceeds {limit:e}")]
    CutoffTooSmall { cutoff: usize, tail: f64, limit: f64 },

    /// A density matrix failed Hermiticity, trace or positivity checks.
    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid profile: {0}")]
    Profile(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
