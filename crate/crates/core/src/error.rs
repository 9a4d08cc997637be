use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("contraction mismatch: leg {a_leg} of a has dim {a_dim}, leg {b_leg} of b has dim {b_dim}")]
    Contraction {
        a_leg: usize,
        b_leg: usize,
        a_dim: usize,
        b_dim: usize,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("size limit exceeded: {0}")]
    Size(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("no direct link between nodes {from} and {to}; route with move_center")]
    Path { from: usize, to: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("optimizer diverged: {0}")]
    Diverged(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable short name of the variant, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Contraction { .. } => "contraction",
            Error::Argument(_) => "argument",
            Error::Size(_) => "size",
            Error::Dimension(_) => "dimension",
            Error::Path { .. } => "path",
            Error::Parse { .. } => "parse",
            Error::Diverged(_) => "diverged",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
