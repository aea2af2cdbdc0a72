use thiserror::Error;

/// Errors produced by the engine.
///
/// Numerical aborts (CFL refusal, NaN blow-up) are kept separate from input
/// errors so front-ends can map them to distinct exit statuses.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("empty uncertainty set")]
    EmptySet,

    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid control policy: {0}")]
    InvalidPolicy(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("CFL condition violated: number {cfl:.6} exceeds 1")]
    Cfl { cfl: f64 },

    #[error("numerical abort: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Cfl { .. } | Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
