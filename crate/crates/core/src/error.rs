use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
///
/// Conditions that the caller is expected to inspect (non-convergence, failed
/// Monte Carlo checks, inconclusive verdicts) are reported as data, not as
/// errors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric range exceeded: {0}")]
    NumericRange(String),

    #[error("pair outside the domain of T_X: X_s == X_t at indices ({s}, {t})")]
    OutsideDomain { s: usize, t: usize },

    #[error("resolution exhausted: {0}")]
    ResolutionExhausted(String),

    #[error("grid does not belong to this path (grid built for {grid_len} points, path has {path_len})")]
    GridMismatch { grid_len: usize, path_len: usize },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalogEntry(String),

    #[error("csv: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
