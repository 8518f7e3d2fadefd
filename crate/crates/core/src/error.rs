use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not unitary (residual {residual:.3e} > {tolerance:.1e})")]
    NotUnitary { residual: f64, tolerance: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("expected {expected} angles, got {got}")]
    AngleCount { expected: usize, got: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("dimension {total} does not factor as {m} x {n}")]
    NotFactorable { total: usize, m: usize, n: usize },

    #[error("could not realize a real eigenbasis: {0}")]
    RealBasis(String),

    #[error("matrix is not in the image of the principal real logarithm: {0}")]
    NotInExponentialImage(String),

    #[error("linear system is singular")]
    SingularSystem,

    #[error("eigendecomposition did not converge")]
    NoConvergence,

    #[error("reconstruction residual {residual:.3e} exceeds {tolerance:.1e}")]
    Reconstruction { residual: f64, tolerance: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable tag used in CLI error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotUnitary { .. } => "not_unitary",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::InvalidGenerator(_) => "invalid_generator",
            Error::AngleCount { .. } => "angle_count",
            Error::InvalidGate(_) => "invalid_gate",
            Error::NotFactorable { .. } => "not_factorable",
            Error::RealBasis(_) => "real_basis",
            Error::NotInExponentialImage(_) => "not_in_exponential_image",
            Error::SingularSystem => "singular_system",
            Error::NoConvergence => "no_convergence",
            Error::Reconstruction { .. } => "reconstruction",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
