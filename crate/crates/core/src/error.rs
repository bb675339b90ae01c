use std::path::PathBuf;

use crate::grid::GridField;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("grid must be at least 3x3, got {width}x{height}")]
    GridTooSmall { width: usize, height: usize },

    #[error("expected {expected} values for the grid, got {actual}")]
    ValueCount { expected: usize, actual: usize },

    #[error("geometry mismatch: {0}")]
    GeometryMismatch(&'static str),

    #[error("non-finite value in field at cell {0}")]
    NonFinite(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no configuration boundary: mask is empty or covers the whole domain")]
    NoConfigurationBoundary,

    #[error("empty configuration")]
    EmptyConfiguration,

    #[error("configuration touches boundary")]
    ConfigurationTouchesBoundary,

    #[error(
        "conjugate gradient did not converge in {iterations} iterations \
         (relative residual {residual:.3e})"
    )]
    CgNotConverged {
        iterations: usize,
        residual: f64,
        best: Box<GridField>,
    },

    #[error("dense oracle supports at most {max} unknowns, got {unknowns}")]
    OracleTooLarge { unknowns: usize, max: usize },

    #[error("dense oracle: singular system")]
    SingularSystem,

    #[error("post-solve clamp of {excursion:.3e} exceeds allowed {allowed:.3e} at outer step {step}")]
    ClampExceeded {
        step: usize,
        excursion: f64,
        allowed: f64,
    },

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
