use std::fmt;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument was outside the domain of the function.
    Domain(String),
    /// A series or quadrature failed to converge, or a result left the representable range.
    Numerical(String),
    /// A PD count that is not of the hexagonal form `1 + 3G(G+1)`.
    Shape { m: u64, nearest: u64 },
    /// The requested operation is not defined for this beam pattern.
    UnsupportedModel(String),
    /// A brute-force search was asked to enumerate a space that is too large.
    Capacity(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Numerical(msg) => write!(f, "numerical error: {msg}"),
            Error::Shape { m, nearest } => write!(
                f,
                "shape error: M = {m} is not of the form 1 + 3G(G+1) (nearest valid M is {nearest})"
            ),
            Error::UnsupportedModel(msg) => write!(f, "unsupported model: {msg}"),
            Error::Capacity(msg) => write!(f, "capacity error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite_nonneg(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and >= 0, got {value}")))
    }
}

pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and > 0, got {value}")))
    }
}
