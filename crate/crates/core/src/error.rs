use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension must be even and at least 2, got {0}")]
    OddDimension(usize),

    #[error("{op} is only defined in dimension {required}, got {found}")]
    UnsupportedDimension {
        op: &'static str,
        required: &'static str,
        found: usize,
    },

    #[error("matrix is not symmetric (residual {0:.3e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("endomorphism is not skew with respect to the metric (residual {0:.3e})")]
    NotSkew(f64),

    #[error("endomorphism is not a complex structure: |J² + Id| = {0:.3e}")]
    NotComplexStructure(f64),

    #[error("complex structure is not orthogonal for the metric (residual {0:.3e})")]
    NotCompatible(f64),

    #[error("endomorphism is not tangent to the fibre at J (residual {0:.3e})")]
    NotVertical(f64),

    #[error("spectrum is not positive (smallest eigenvalue {0:.3e})")]
    NonPositiveSpectrum(f64),

    #[error("matrix is not in SO(4) (orthogonality residual {orth:.3e}, det {det:.6})")]
    NotSpecialOrthogonal { orth: f64, det: f64 },

    #[error("space carries no orientation")]
    NotOriented,

    #[error("matrix is singular")]
    Singular,

    #[error("finite-difference stencil of half-width {reach:.3e} leaves the domain at coordinate {axis}")]
    StencilOutOfDomain { axis: usize, reach: f64 },

    #[error("tangent vectors live over different twistor points")]
    PointMismatch,

    #[error("operation requires a conformal metric pair")]
    NotConformal,

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown check `{0}`")]
    UnknownCheck(String),

    #[error("unknown report format `{0}`")]
    UnknownFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
