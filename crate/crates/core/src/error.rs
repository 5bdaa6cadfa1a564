use thiserror::Error;

/// Errors raised by the lab. Numerical non-finiteness of potentials is not an
/// error: it is reported as `f64::INFINITY`.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("degenerate lattice: {0}")]
    DegenerateLattice(String),
    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),
    #[error("lattice too small: {0}")]
    LatticeTooSmall(String),
    #[error("empty ball: no lattice node within radius {radius} of {center:?}")]
    EmptyBall { center: Vec<f64>, radius: f64 },
    #[error("singular point: {0}")]
    SingularPoint(String),
    #[error("undefined ratio: {0}")]
    Undefined(String),
    #[error("solver did not converge: {0}")]
    NotConverged(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag, used in CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::InvalidMeasure(_) => "invalid_measure",
            Error::DegenerateLattice(_) => "degenerate_lattice",
            Error::LatticeMismatch(_) => "lattice_mismatch",
            Error::LatticeTooSmall(_) => "lattice_too_small",
            Error::EmptyBall { .. } => "empty_ball",
            Error::SingularPoint(_) => "singular_point",
            Error::Undefined(_) => "undefined",
            Error::NotConverged(_) => "not_converged",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
