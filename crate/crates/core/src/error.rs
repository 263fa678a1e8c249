use thiserror::Error;

/// Errors raised by the geometric kernels and the file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("degenerate secant (norm {norm:e})")]
    DegenerateSecant { norm: f64 },

    #[error("curves intersect at sample {index} (s = {s})")]
    IntersectingCurves { index: usize, s: f64 },

    #[error("point at infinity: (xi, q) = {0:e}")]
    PointAtInfinity(f64),

    #[error("lines are not complementary: (xi, xi_hat) = {0:e}")]
    NonComplementary(f64),

    #[error("gauge factor must be non-zero")]
    ZeroGaugeFactor,

    #[error("singular encounter at s = {s}: {reason}")]
    SingularEncounter { s: f64, reason: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("curve is not immersed at sample {index} (s = {s})")]
    NotImmersed { index: usize, s: f64 },

    #[error("polarization vanishes at sample {index} (s = {s})")]
    ZeroPolarization { index: usize, s: f64 },

    #[error("curve is not parametrized by arc length (max |x'| deviation {deviation:e})")]
    NonUnitSpeed { deviation: f64 },

    #[error("isotropic tangent: (xi', xi') = {0:e}")]
    IsotropicTangent(f64),

    #[error("points are not concircular (non-scalar residual {residual:e})")]
    NotConcircular { residual: f64 },

    #[error("coincident points")]
    CoincidentPoints,

    #[error("spectral parameter {t} collides with {what}")]
    ParameterCollision { t: f64, what: String },

    #[error("mixed area elements are not parallel (angle {angle:e})")]
    NonParallel { angle: f64 },

    #[error("degenerate edge {edge}: vanishing area element")]
    DegenerateEdge { edge: usize },

    #[error("conserved quantities of degree {0} are not supported")]
    UnsupportedDegree(usize),

    #[error("inconsistent Moutard sign on edge {edge}")]
    InconsistentSign { edge: usize },

    #[error("{layer} {index}: {source}")]
    Layer {
        layer: &'static str,
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn in_layer(self, layer: &'static str, index: usize) -> Self {
        Error::Layer {
            layer,
            index,
            source: Box::new(self),
        }
    }
}
