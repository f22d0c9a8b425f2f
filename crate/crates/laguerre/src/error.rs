//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A gamma-ratio or Pochhammer product hit a pole of the gamma function.
    #[error("pole: {0}")]
    Pole(String),

    /// Vector/matrix sizes do not match what the operation expects.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Argument outside the operation's domain.
    #[error("domain: {0}")]
    Domain(String),

    /// A hypergeometric series diverges for the requested parameters.
    #[error("divergent series: {0}")]
    Divergence(String),

    /// The series cap was reached before the stopping rule fired.
    #[error("series did not converge within {max_terms} terms (last term {last_term:e})")]
    NonConvergence { max_terms: usize, last_term: f64 },

    /// Eigenvalues too close for a determinantal formula; use the series route.
    #[error("coincident eigenvalues (min gap {min_gap:e}); determinantal form is 0/0")]
    CoincidentEigenvalues { min_gap: f64 },

    /// A matrix that must be positive semidefinite is not.
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    /// A path state became numerically singular where an inverse is needed.
    #[error("singular state along path at step {step} (min eigenvalue {min_eig:e})")]
    SingularState { step: usize, min_eig: f64 },

    /// Quadrature failed to reach the requested tolerance.
    #[error("quadrature did not converge (error estimate {estimate:e})")]
    QuadratureNonConvergence { estimate: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
