use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("chart domain error: {0}")]
    ChartDomain(String),

    #[error("unsupported derivative order {0} (only 1 and 2 are supported)")]
    UnsupportedOrder(u32),

    #[error("word ball truncated at {cap} elements")]
    Truncated { cap: usize },

    #[error("generator set must be symmetric for {0}")]
    NotSymmetric(&'static str),

    #[error("point is not fixed by the word (residual {residual:e})")]
    NotFixed { residual: f64 },

    #[error("no fixed point found (best residual {best_residual:e})")]
    NotFound { best_residual: f64 },

    #[error("interpolation density error: image point {distance:e} rad from nearest sample exceeds radius {radius:e}; raise the sample count")]
    Density { distance: f64, radius: f64 },

    #[error("scenario parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("scenario validation error at `{path}`: {message}")]
    Scenario { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
