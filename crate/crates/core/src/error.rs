use thiserror::Error;

/// Errors raised by the link models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain of the model.
    #[error("{field}: {reason} (got {value})")]
    Domain {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The aperture ratio is already at or below one at the launch plane.
    #[error("no compensation boundary: aperture ratio at launch is {ratio_at_launch} (must exceed 1)")]
    NoBoundary { ratio_at_launch: f64 },

    /// A sweep addressed a field that does not exist.
    #[error("unknown parameter path `{path}`; valid paths: {}", valid.join(", "))]
    UnknownParameter {
        path: String,
        valid: &'static [&'static str],
    },

    /// Inconsistent lengths or shapes between inputs.
    #[error("{0}")]
    Shape(String),

    /// Wraps a sub-module failure with scenario context.
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(field: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            field,
            value,
            reason,
        }
    }

    pub(crate) fn with_context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

/// Fails with a domain error unless `value` is finite and `>= 0`.
pub(crate) fn non_negative(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(field, value, "must be finite and non-negative"))
    }
}

/// Fails with a domain error unless `value` is finite and `> 0`.
pub(crate) fn positive(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(field, value, "must be finite and positive"))
    }
}

/// Fails with a domain error unless `value` lies in `[0, 1]`.
pub(crate) fn probability(field: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::domain(field, value, "must lie in [0, 1]"))
    }
}
