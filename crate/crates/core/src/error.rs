use std::fmt;

/// Errors produced by the analysis library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A value violates a documented invariant. `field` names the offender.
    #[error("invalid {field}: {message}")]
    Domain { field: String, message: String },

    /// Not enough usable samples for an estimate.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Two inputs describe the same line, so no unique crossing exists.
    #[error("degenerate: {0}")]
    Degenerate(String),

    /// A tabular or structured document does not match the expected schema.
    #[error("schema: {0}")]
    Schema(String),

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl Error {
    pub fn domain(field: impl Into<String>, message: impl fmt::Display) -> Self {
        Error::Domain {
            field: field.into(),
            message: message.to_string(),
        }
    }

    /// Stable machine-readable code for the error class.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain_error",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Degenerate(_) => "degenerate",
            Error::Schema(_) => "schema_error",
            Error::Io(_) => "io_error",
            Error::Parse(_) => "parse_error",
        }
    }

    /// The offending field, when the error is tied to one.
    pub fn field(&self) -> Option<&str> {
        match self {
            Error::Domain { field, .. } => Some(field),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks that `value` is finite and nonnegative.
pub(crate) fn ensure_nonnegative(field: &str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::domain(field, format!("must be finite, got {value}")));
    }
    if value < 0.0 {
        return Err(Error::domain(field, format!("must be >= 0, got {value}")));
    }
    Ok(())
}

/// Checks that `value` lies in the closed interval `[lo, hi]`.
pub(crate) fn ensure_in_range(field: &str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if !value.is_finite() || value < lo || value > hi {
        return Err(Error::domain(
            field,
            format!("must be in [{lo}, {hi}], got {value}"),
        ));
    }
    Ok(())
}
