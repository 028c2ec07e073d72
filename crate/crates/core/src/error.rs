use std::path::PathBuf;

use num_complex::Complex64;

/// Errors produced by the solver library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {cause}")]
    Io { path: PathBuf, cause: std::io::Error },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("topology error: {0}")]
    Topology(String),

    #[error("orientation error: {0}")]
    Orientation(String),

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("point is outside triangle {triangle} (barycentric {bary:?})")]
    PointOutsideTriangle { triangle: usize, bary: [f64; 3] },

    #[error("index out of range: {0}")]
    Index(String),

    #[error("Laplace parameter s = {0} is outside the open right half-plane")]
    LeftHalfPlane(Complex64),

    #[error("coincident points in kernel evaluation")]
    CoincidentPoints,

    #[error("invalid quadrature configuration: {0}")]
    Quadrature(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("probe {index} at distance {distance:.3e} is too close to the boundary (minimum {minimum:.3e})")]
    ProbeTooClose { index: usize, distance: f64, minimum: f64 },

    #[error("CQ weights have imaginary residue {residue:.3e} (threshold {threshold:.1e})")]
    ImaginaryResidue { residue: f64, threshold: f64 },

    #[error("marching residual {residue:.3e} at step {step} exceeds tolerance")]
    MarchResidual { step: usize, residue: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("check failed: {0}")]
    Check(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            cause: source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
