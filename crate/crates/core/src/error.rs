use thiserror::Error;

/// Failure classes shared by every numeric module.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied argument is out of range or shapes disagree.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// Input data is malformed (non-finite values, bad encodings, ...).
    #[error("invalid data: {0}")]
    Data(String),
    /// A factorization or solve did not produce a usable result.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! param_err {
    ($($arg:tt)*) => { $crate::error::Error::Parameter(format!($($arg)*)) };
}

macro_rules! data_err {
    ($($arg:tt)*) => { $crate::error::Error::Data(format!($($arg)*)) };
}

pub(crate) use data_err;
pub(crate) use param_err;
