use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A configuration value is outside its valid domain.
    InvalidConfig(String),
    /// Two operands disagree on a dimension.
    ShapeMismatch { expected: String, found: String },
    /// The input is too short for the requested analysis.
    SignalTooShort { needed: usize, found: usize },
    /// A filterbank row ended up with no positive weight.
    EmptyFilter { index: usize },
    /// Statistics requested on data that cannot support them.
    Degenerate(String),
    /// A value fell outside an allowed range (labels, folds, ...).
    OutOfRange(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::ShapeMismatch { expected, found } => {
                write!(f, "shape mismatch: expected {expected}, found {found}")
            }
            Error::SignalTooShort { needed, found } => {
                write!(f, "signal too short: need {needed} samples, got {found}")
            }
            Error::EmptyFilter { index } => write!(
                f,
                "filter {index} has no positive weight; use fewer bands or more FFT bins"
            ),
            Error::Degenerate(msg) => write!(f, "degenerate input: {msg}"),
            Error::OutOfRange(msg) => write!(f, "value out of range: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::Error::InvalidConfig(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
