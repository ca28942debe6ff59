use alloc::string::String;
use core::fmt;

/// Errors surfaced by estimators and numerical routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    Domain(&'static str),
    /// A configuration value is unusable (empty grid, bad node count, ...).
    Config(&'static str),
    /// The observed data are degenerate for the requested analysis.
    DegenerateData(String),
    /// The plausibility at the search center is already below the level, so
    /// no interval contains it.
    NoInterval(&'static str),
    /// Bracket expansion failed to find a sign change (plausibility never
    /// drops below the level), i.e. the set is unbounded.
    Divergence(&'static str),
    /// A numerical routine failed to converge; the payload carries context.
    Numeric(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::DegenerateData(msg) => write!(f, "degenerate data: {msg}"),
            Error::NoInterval(msg) => write!(f, "no interval: {msg}"),
            Error::Divergence(msg) => write!(f, "divergence: {msg}"),
            Error::Numeric(msg) => write!(f, "numeric failure: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
