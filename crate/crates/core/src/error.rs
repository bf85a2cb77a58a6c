use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid model or tool configuration; `path` names the offending field.
    #[error("{path}: {message}")]
    Config { path: String, message: String },

    #[error("singular system (reciprocal condition estimate {rcond:.3e})")]
    SingularSystem { rcond: f64 },

    #[error("z = {z} lies within {radius:.3e} of the Dirichlet eigenvalue {eigenvalue}")]
    NearDirichletSpectrum { z: Complex64, eigenvalue: f64, radius: f64 },

    #[error("z = {z} is (numerically) an eigenvalue of the Robin Laplacian")]
    EigenvalueAt { z: Complex64 },

    /// A documented precondition of an operation does not hold.
    #[error("contract violated: {0}")]
    Contract(String),

    #[error("domain error: {0}")]
    Domain(String),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { path: path.into(), message: message.into() }
    }

    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}
