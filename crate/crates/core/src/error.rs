use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected dimension {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error(
        "Fock cutoff {dim} too small for {what}: truncation deficit {deficit:.3e} \
         exceeds {tolerance:.1e} (minimal cutoff {required})"
    )]
    Truncation { what: String, dim: usize, deficit: f64, tolerance: f64, required: usize },

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("open-system integration failed at t = {t}: trace drift {drift:.3e}")]
    Integration { t: f64, drift: f64 },

    #[error("density matrix lost positivity at t = {t}: minimum eigenvalue {min_eigenvalue:.3e}")]
    Positivity { t: f64, min_eigenvalue: f64 },

    #[error("quadrature grid inadequate: homodyne density integrates to {0}")]
    GridInadequate(f64),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("linear algebra failure: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}
