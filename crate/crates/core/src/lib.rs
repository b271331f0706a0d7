//! Quasi-free states of CAR and CCR algebras in finite dimensions.
//!
//! The crate computes transition probabilities `(φ_S^{1/2} | φ_T^{1/2})` of
//! fermionic and bosonic quasi-free states from their covariances, the
//! Hilbert-Schmidt quantities that decide quasi-equivalence, the quadrature
//! projection of a fermionic covariance, and a quasi-equivalent/disjoint
//! classifier for pairs and for countable product families.
//!
//! Every closed formula has a brute-force counterpart:
//!
//! - [`car_oracle`] builds density matrices on an explicit Jordan-Wigner
//!   Fock space from the Wick moments and evaluates `tr(√ρ √τ)` directly.
//! - [`ccr_oracle`] builds Gibbs states of quadratic boson Hamiltonians on a
//!   truncated Fock space, extracts their covariance and evaluates the same
//!   trace with cutoff convergence checks.
//!
//! Module map:
//!
//! | module | contents |
//! |---|---|
//! | [`matcore`] | Hermitian eigendecomposition, PSD functions, Pfaffian, geometric mean, ratio operators, projection meets |
//! | [`car`] | fermionic covariance operators |
//! | [`ccr`] | bosonic covariance forms over possibly degenerate symplectic forms |
//! | [`seqmodel`] | product families and series-based dichotomy classification |
//! | [`sample`] | seeded random generators for valid covariances |

pub mod car;
pub mod car_oracle;
pub mod ccr;
pub mod ccr_oracle;
pub mod error;
pub mod matcore;
pub mod sample;
pub mod seqmodel;
pub mod verdict;

pub use error::{Error, Result};
pub use matcore::{CMatrix, CVector, HermitianMatrix, ProjectionMatrix, SkewMatrix};
pub use verdict::{Reason, VerdictKind};
