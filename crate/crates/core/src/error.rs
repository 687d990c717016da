use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0} (expected 2 or 3)")]
    UnsupportedDimension(usize),

    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),

    #[error("direction vector has zero length")]
    ZeroDirection,

    #[error("receiver coincides with source (distance {distance:e} m)")]
    Singularity { distance: f64 },

    #[error("argument |z| = {modulus} outside validated range (|z| <= {limit})")]
    ArgumentRange { modulus: f64, limit: f64 },

    #[error("singular or ill-conditioned system (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("empty region")]
    EmptyRegion,

    #[error("field maps are defined on different grids")]
    GridMismatch,

    #[error("desired field has zero energy over the region")]
    ZeroEnergy,

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for errors caused by user input rather than by the computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config { .. }
                | Error::ConfigParse { .. }
                | Error::InvalidParameter(_)
                | Error::InvalidScene(_)
                | Error::EmptyRegion
                | Error::UnsupportedDimension(_)
                | Error::DimensionMismatch { .. }
                | Error::ZeroDirection
                | Error::NonFinite(_)
        )
    }
}
