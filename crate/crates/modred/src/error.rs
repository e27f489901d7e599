use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("columns are not orthonormal (deviation {deviation:.3e} > {tol:.3e})")]
    NotOrthonormal { deviation: f64, tol: f64 },
    #[error("operator failed symmetry probe (deviation {0:.3e})")]
    NotSymmetric(f64),
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("forward map failed on draw {draw}: {reason}")]
    Draw { draw: usize, reason: String },
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("bad file format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
