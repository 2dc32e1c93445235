use thiserror::Error;

/// Errors raised by the rate model, its numerics and the optimizer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QkdError {
    /// An argument fell outside the domain of a numeric routine.
    #[error("{function}: argument {value} outside domain {domain}")]
    Domain {
        function: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// A parameter failed validation when building a parameter set.
    #[error("parameter `{name}` = {value} outside legal range {range}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    /// An iterative solver could not produce a result.
    #[error("{0}")]
    Convergence(String),

    /// A sweep point failed; wraps the underlying error with its location.
    #[error("at {axis} = {at}: {source}")]
    AtPoint {
        axis: &'static str,
        at: f64,
        #[source]
        source: Box<QkdError>,
    },
}

pub type Result<T, E = QkdError> = std::result::Result<T, E>;

impl QkdError {
    pub(crate) fn domain(function: &'static str, value: f64, domain: &'static str) -> Self {
        QkdError::Domain {
            function,
            value,
            domain,
        }
    }

    pub(crate) fn at(self, axis: &'static str, at: f64) -> Self {
        QkdError::AtPoint {
            axis,
            at,
            source: Box::new(self),
        }
    }
}
