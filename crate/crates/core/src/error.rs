use thiserror::Error;

/// Errors produced by the polygonization library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("topology error: segments {a:?} and {b:?} cross without a shared node")]
    NonPlanar { a: (usize, usize), b: (usize, usize) },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("scene generation failed: could not place template `{template}` after {attempts} attempts")]
    Placement { template: String, attempts: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable category used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape(_) => "shape",
            Error::Format(_) => "format",
            Error::InvalidInput(_) => "invalid_input",
            Error::NonPlanar { .. } => "topology",
            Error::Numerical(_) => "numerical",
            Error::Placement { .. } => "placement",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
