use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

/// Errors raised by kernel evaluation, configuration validation and the
/// numerical checks.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the admissible set (point outside the
    /// domain, nome outside `(0, 1)`, dimension too small, ...).
    Domain(String),
    /// Two points coincide where the kernel is singular.
    Singular,
    /// A truncated series could not certify the requested tolerance.
    Convergence { terms: usize, tail: f64 },
    /// A vector has the wrong number of coordinates.
    Dimension { expected: usize, found: usize },
    /// A configuration invariant is violated.
    Config(String),
    /// A precondition of an operation is not met.
    Precondition(String),
    /// A theorem trial failed to evaluate.
    Trial { index: usize, seed: u64, source: Box<Error> },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Singular => f.write_str("kernel evaluated at coincident points"),
            Error::Convergence { terms, tail } => write!(
                f,
                "series did not converge: tail bound {tail:e} after {terms} terms"
            ),
            Error::Dimension { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::Trial { index, seed, source } => {
                write!(f, "trial {index} (seed {seed}) failed: {source}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn domain_err(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
