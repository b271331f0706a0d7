use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },

    #[error("matrix is not Hermitian (max violation {max_violation:.3e})")]
    NotHermitian { max_violation: f64 },

    #[error("matrix is not PSD (eigenvalue {eigenvalue:.3e})")]
    NotPsd { eigenvalue: f64 },

    #[error("S + conj(S) != I (max violation {max_violation:.3e})")]
    CarRelation { max_violation: f64 },

    #[error("not a covariance form (minimal eigenvalue of R + i*sigma/2 is {min_eigenvalue:.3e})")]
    NotCovarianceForm { min_eigenvalue: f64 },

    #[error("not a projection (defect {defect:.3e})")]
    NotProjection { defect: f64 },

    #[error("Pfaffian requires an even dimension, got {dim}")]
    OddDimension { dim: usize },

    #[error("Hermitian eigensolver did not converge for a {dim}x{dim} matrix")]
    NoConvergence { dim: usize },

    #[error("support of X is not contained in the support of G (witness {witness:?})")]
    SupportViolation { witness: Vec<Complex64> },

    #[error("degenerate covariance: eigenvalue {eigenvalue:.3e} touches 0 or 1")]
    DegenerateCovariance { eigenvalue: f64 },

    #[error("size cap exceeded: {what} = {value} > {cap}")]
    SizeCap {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("quadratic Hamiltonian is gapless or unbounded below (min eigenvalue {min_eigenvalue:.3e})")]
    Gapless { min_eigenvalue: f64 },

    #[error("truncated overlap did not converge (last increment {increment:.3e} at cutoff {cutoff})")]
    Inconclusive { increment: f64, cutoff: usize },

    #[error("qe sums and transition-probability sums disagree: {0}")]
    ConsistencyViolation(String),

    #[error("invalid mode family: {0}")]
    InvalidFamily(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn shape(expected: impl Into<String>, found: impl Into<String>) -> Self {
        Error::Shape {
            expected: expected.into(),
            found: found.into(),
        }
    }

    /// True for errors that mean "the input is not a valid object", as opposed
    /// to resource or convergence failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Shape { .. }
                | Error::NotHermitian { .. }
                | Error::NotPsd { .. }
                | Error::CarRelation { .. }
                | Error::NotCovarianceForm { .. }
                | Error::NotProjection { .. }
                | Error::OddDimension { .. }
                | Error::SupportViolation { .. }
                | Error::DegenerateCovariance { .. }
                | Error::Gapless { .. }
                | Error::InvalidFamily(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
