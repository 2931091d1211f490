use thiserror::Error;

/// Errors raised by the framework library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension {0}: a diamantine framework needs d >= 2")]
    InvalidDimension(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("edge vector p{0} has zero length")]
    ZeroLengthBar(usize),

    #[error("degenerate unit cell: |V| = {volume:e} is below the degeneracy threshold")]
    DegenerateCell { volume: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("omega is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    ConeViolation { min_eigenvalue: f64 },

    #[error("(omega, s) is off the realizability hypersurface: |p0|^2 = {realized}, expected {expected}")]
    OffHypersurface { realized: f64, expected: f64 },

    #[error("gram matrix is not positive semidefinite of rank d: {0}")]
    Realization(String),

    #[error("configuration is not a realized saddle: {0}")]
    SaddleRequired(String),

    #[error("configuration has no auxetic capability ({0})")]
    Incapable(String),

    #[error("unsupported squared lengths: {0}")]
    UnsupportedLengths(String),

    #[error("off the Cayley cubic: f(omega) = {0:e}")]
    OffCubic(f64),

    #[error("format error: {0}")]
    Format(String),

    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Name of the module family that raised the error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::InvalidDimension(_)
            | Error::Shape(_)
            | Error::ZeroLengthBar(_)
            | Error::DegenerateCell { .. } => "framework",
            Error::ConeViolation { .. } | Error::OffHypersurface { .. } => "gram",
            Error::Realization(_) | Error::SaddleRequired(_) => "critical",
            Error::Input(_) => "input",
            Error::Incapable(_) => "auxetic",
            Error::UnsupportedLengths(_) | Error::OffCubic(_) => "cayley",
            Error::Format(_) | Error::Parse { .. } => "io",
            Error::Numerical(_) => "numeric",
        }
    }

    /// Process exit code: 2 parse error, 3 precondition violation, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } => 2,
            Error::Realization(_) | Error::Numerical(_) => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
