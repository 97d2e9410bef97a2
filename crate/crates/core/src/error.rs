use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// An infinite series hit its term budget before meeting the tolerance.
    #[error("{what} series did not converge after {terms} terms")]
    NonConvergence { what: String, terms: usize },

    /// The requested count vector has probability zero.
    #[error("probability mass is zero: {0}")]
    MassZero(String),

    #[error("inverse-transform sampler exceeded {cap} mass terms")]
    IterationCap { cap: usize },

    #[error("optimizer failed to converge from every start ({starts} starts)")]
    NoConvergence { starts: usize },

    /// More benchmark replications failed than a stratum tolerates.
    #[error("{failed} of {total} benchmark replications failed")]
    TooManyFailures { failed: usize, total: usize },

    #[error("observed information matrix is not positive definite")]
    SingularInformation,

    #[error("parse error at row {row}: {msg}")]
    Parse { row: usize, msg: String },

    #[error("no observations left after filtering ({dropped} dropped)")]
    EmptyAfterFilter { dropped: usize },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("json error: {0}")]
    Json(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Attach context to a convergence failure, e.g. the observation index.
    pub fn with_context(self, ctx: impl AsRef<str>) -> Self {
        match self {
            Error::NonConvergence { what, terms } => Error::NonConvergence {
                what: format!("{what} ({})", ctx.as_ref()),
                terms,
            },
            other => other,
        }
    }

    /// True for failures caused by series/optimizer convergence rather than bad input.
    pub fn is_convergence(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::IterationCap { .. }
                | Error::NoConvergence { .. }
                | Error::TooManyFailures { .. }
                | Error::SingularInformation
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
