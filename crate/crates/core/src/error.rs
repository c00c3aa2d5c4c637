use thiserror::Error;

/// Errors surfaced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("resolvent pole: lambda = {lambda} too close to a pole of (a a^H + lambda I)^-1")]
    ResolventPole { lambda: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short stable code used in sweep records and over the C ABI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid-config",
            Error::ConfigParse { .. } => "config-parse",
            Error::DegenerateGeometry(_) => "degenerate-geometry",
            Error::DimensionMismatch(_) => "dimension-mismatch",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::NumericalFailure(_) => "numerical-failure",
            Error::ResolventPole { .. } => "resolvent-pole",
            Error::Io { .. } => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
