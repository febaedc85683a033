use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    Domain(String),
    /// The measure does not satisfy the assumptions of the Cheeger computation.
    UnsupportedMeasure(String),
    /// A fixed-size table or tensor grid is too small for the request.
    Capacity(String),
    /// Matrices or vectors with incompatible shapes.
    Shape(String),
    /// Zero output variance; normalised indices are undefined.
    DegenerateModel,
    /// The model cannot provide what was asked of it (e.g. an analytic gradient).
    Capability(String),
    /// The model failed to evaluate.
    Evaluation(String),
    /// Two rankings over different input sets.
    MismatchedSets,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::UnsupportedMeasure(msg) => write!(f, "unsupported measure: {msg}"),
            Error::Capacity(msg) => write!(f, "capacity exceeded: {msg}"),
            Error::Shape(msg) => write!(f, "shape mismatch: {msg}"),
            Error::DegenerateModel => f.write_str("degenerate model: output variance is zero"),
            Error::Capability(msg) => write!(f, "unsupported capability: {msg}"),
            Error::Evaluation(msg) => write!(f, "model evaluation failed: {msg}"),
            Error::MismatchedSets => f.write_str("rankings cover different input sets"),
        }
    }
}

impl core::error::Error for Error {}

macro_rules! domain {
    ($($arg:tt)*) => { $crate::Error::Domain(alloc::format!($($arg)*)) };
}
pub(crate) use domain;
