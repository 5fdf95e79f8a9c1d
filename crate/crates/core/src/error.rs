use core::fmt;

/// Errors raised while building primitives or mechanisms.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A privacy parameter is outside the range accepted by the operation.
    InvalidParameters(&'static str),
    /// The recursive reference construction was asked for too large an `n`.
    OracleRange { n: u64, max: u64 },
    /// Noise calibration could not bracket a solution.
    Calibration(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameters(msg) => write!(f, "invalid parameters: {msg}"),
            Error::OracleRange { n, max } => {
                write!(f, "recursive construction limited to n <= {max}, got {n}")
            }
            Error::Calibration(msg) => write!(f, "invalid parameters: calibration failed: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
