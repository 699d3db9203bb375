use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// An initialization produced a kernel variance with a nonpositive
    /// component (e.g. a single-point cluster or identical constellation
    /// centers) and no epsilon floor was requested.
    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    /// A dataset statistic required for normalization is degenerate
    /// (zero variance).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("unsupported scheme: {0}")]
    UnsupportedScheme(String),

    /// A cached forward trace does not match the network it is used with.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
