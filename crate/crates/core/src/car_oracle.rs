//! Brute-force fermionic oracle on an explicit Fock space.
//!
//! `n` modes give `2n` Hermitian Clifford generators `c_j` on `C^{2^n}` via
//! Jordan-Wigner, with `c_j c_k + c_k c_j = 2 δ_{jk}`. The scaled generators
//! `e_j = c_j / √2` satisfy `e_j e_k + e_k e_j = δ_{jk}`, matching the
//! normalization of the covariance operators in [`crate::car`].
//!
//! A density matrix is assembled from its moments in the orthogonal basis
//! of ordered monomials `c_A`, `tr(c_A^* c_B) = 2^n δ_{AB}`:
//! `ρ = 2^{-n} Σ_A tr(ρ c_A) c_A^*`.

use nalgebra::SVD;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::car::CarCovariance;
use crate::error::{Error, Result};
use crate::matcore::{c, pfaffian, sqrt_psd, CMatrix, HermitianMatrix, SkewMatrix, DEFAULT_CLAMP_TOL};

pub const MAX_ORACLE_MODES: usize = 10;

/// `i^phase X^x Z^z` on `n` qubits; bit `j` of `x`, `z` acts on qubit `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct PauliWord {
    x: u32,
    z: u32,
    phase: u8,
}

const I_POWERS: [Complex64; 4] = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];

impl PauliWord {
    const IDENTITY: PauliWord = PauliWord { x: 0, z: 0, phase: 0 };

    fn mul(self, rhs: PauliWord) -> PauliWord {
        // Z^z X^x = (-1)^{|z & x|} X^x Z^z
        let swap = 2 * (self.z & rhs.x).count_ones();
        PauliWord {
            x: self.x ^ rhs.x,
            z: self.z ^ rhs.z,
            phase: ((self.phase as u32 + rhs.phase as u32 + swap) % 4) as u8,
        }
    }

    fn adjoint(self) -> PauliWord {
        let swap = 2 * (self.x & self.z).count_ones();
        PauliWord {
            phase: ((4 - self.phase as u32 + swap) % 4) as u8,
            ..self
        }
    }

    /// Image of basis vector `b`: `(row, coefficient)`.
    fn apply(self, b: usize) -> (usize, Complex64) {
        let sign = if (self.z as usize & b).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        (b ^ self.x as usize, I_POWERS[self.phase as usize] * sign)
    }

    fn to_dense(self, n_modes: usize) -> CMatrix {
        let dim = 1usize << n_modes;
        let mut m = CMatrix::zeros(dim, dim);
        for b in 0..dim {
            let (row, v) = self.apply(b);
            m[(row, b)] = v;
        }
        m
    }
}

fn jw_word(j: usize) -> PauliWord {
    let mode = j / 2;
    let string = (1u32 << mode) - 1;
    if j.is_multiple_of(2) {
        PauliWord { x: 1 << mode, z: string, phase: 0 }
    } else {
        // Y = i X Z
        PauliWord { x: 1 << mode, z: string | (1 << mode), phase: 1 }
    }
}

fn monomial_word(subset: &[usize]) -> PauliWord {
    subset.iter().fold(PauliWord::IDENTITY, |acc, &j| acc.mul(jw_word(j)))
}

/// Jordan-Wigner Clifford generators.
#[derive(Debug, Clone)]
pub struct CliffordRep {
    pub n_modes: usize,
    pub generators: Vec<CMatrix>,
}

impl CliffordRep {
    pub fn fock_dim(&self) -> usize {
        1 << self.n_modes
    }

    /// The ordered product `c_{a_1} c_{a_2} ... c_{a_k}`.
    pub fn monomial(&self, subset: &[usize]) -> CMatrix {
        monomial_word(subset).to_dense(self.n_modes)
    }
}

pub fn jw_generators(n_modes: usize) -> Result<CliffordRep> {
    if n_modes == 0 || n_modes > MAX_ORACLE_MODES {
        return Err(Error::SizeCap {
            what: "fermionic oracle modes",
            value: n_modes,
            cap: MAX_ORACLE_MODES,
        });
    }
    let generators = (0..2 * n_modes).map(|j| jw_word(j).to_dense(n_modes)).collect();
    Ok(CliffordRep { n_modes, generators })
}

/// A unit-trace PSD matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(HermitianMatrix);

impl DensityMatrix {
    /// Accepts PSD within `1e-10` and trace within `1e-10` of one.
    pub fn new(rho: HermitianMatrix) -> Result<Self> {
        Self::checked(rho, 1e-10)
    }

    pub(crate) fn checked(rho: HermitianMatrix, psd_tol: f64) -> Result<Self> {
        let trace = rho.trace();
        if (trace - 1.0).abs() > 1e-10 {
            return Err(Error::Internal(format!("density matrix trace {trace}")));
        }
        let lowest = rho.min_eigenvalue()?;
        if lowest < -psd_tol {
            return Err(Error::NotPsd { eigenvalue: lowest });
        }
        Ok(DensityMatrix(rho))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn as_matrix(&self) -> &CMatrix {
        self.0.as_matrix()
    }

    /// `tr(ρ X)`.
    pub fn expectation(&self, x: &CMatrix) -> Complex64 {
        trace_product(self.as_matrix(), x)
    }

    /// `tr(ρ^2)`.
    pub fn purity(&self) -> f64 {
        trace_product(self.as_matrix(), self.as_matrix()).re
    }
}

fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = c(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `φ_S(c_A)` for an increasing index list `A`.
fn monomial_moment(s: &CarCovariance, subset: &[usize]) -> Result<Complex64> {
    if subset.len() % 2 == 1 {
        return Ok(c(0.0, 0.0));
    }
    let m = s.matrix().as_matrix();
    let a = SkewMatrix::from_upper(subset.len(), |j, k| m[(subset[j], subset[k])]);
    let scale = (1u64 << (subset.len() / 2)) as f64;
    Ok(pfaffian(&a)? * scale)
}

fn bits(mask: usize) -> Vec<usize> {
    (0..usize::BITS as usize).filter(|&j| mask >> j & 1 == 1).collect()
}

/// Density matrix of the quasi-free state `φ_S` on `2^{d/2}`-dimensional
/// Fock space, assembled from its Wick moments.
pub fn density_from_covariance(s: &CarCovariance) -> Result<DensityMatrix> {
    let d = s.dim();
    if d % 2 == 1 {
        return Err(Error::shape("even number of generators", format!("{d}")));
    }
    let n = d / 2;
    if n == 0 || n > MAX_ORACLE_MODES {
        return Err(Error::SizeCap {
            what: "fermionic oracle modes",
            value: n,
            cap: MAX_ORACLE_MODES,
        });
    }
    let terms: Vec<(PauliWord, Complex64)> = (0usize..1 << d)
        .into_par_iter()
        .filter(|mask| mask.count_ones() % 2 == 0)
        .map(|mask| {
            let subset = bits(mask);
            let moment = monomial_moment(s, &subset)?;
            Ok((monomial_word(&subset).adjoint(), moment))
        })
        .collect::<Result<_>>()?;

    let dim = 1usize << n;
    let norm = 1.0 / dim as f64;
    let mut rho = CMatrix::zeros(dim, dim);
    for (word, moment) in terms {
        if moment == c(0.0, 0.0) {
            continue;
        }
        for b in 0..dim {
            let (row, v) = word.apply(b);
            rho[(row, b)] += moment * v * norm;
        }
    }
    DensityMatrix::checked(HermitianMatrix::symmetrized(rho), 1e-9).map_err(|e| match e {
        Error::NotPsd { eigenvalue } => Error::Internal(format!(
            "moment expansion is not PSD (eigenvalue {eigenvalue:.3e})"
        )),
        other => other,
    })
}

fn same_dim(rho: &DensityMatrix, tau: &DensityMatrix) -> Result<()> {
    if rho.dim() != tau.dim() {
        return Err(Error::shape(format!("dim {}", rho.dim()), format!("dim {}", tau.dim())));
    }
    Ok(())
}

/// `tr(√ρ √τ)`.
pub fn overlap(rho: &DensityMatrix, tau: &DensityMatrix) -> Result<f64> {
    same_dim(rho, tau)?;
    let a = sqrt_psd(rho.as_hermitian(), DEFAULT_CLAMP_TOL)?;
    let b = sqrt_psd(tau.as_hermitian(), DEFAULT_CLAMP_TOL)?;
    Ok(overlap_of_roots(&a, &b))
}

pub(crate) fn overlap_of_roots(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
    trace_product(a.as_matrix(), b.as_matrix()).re.clamp(0.0, 1.0)
}

/// `tr |√ρ √τ|`, the sum of singular values.
pub fn fidelity_tr(rho: &DensityMatrix, tau: &DensityMatrix) -> Result<f64> {
    same_dim(rho, tau)?;
    let a = sqrt_psd(rho.as_hermitian(), DEFAULT_CLAMP_TOL)?;
    let b = sqrt_psd(tau.as_hermitian(), DEFAULT_CLAMP_TOL)?;
    fidelity_of_roots(&a, &b)
}

pub(crate) fn fidelity_of_roots(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    let prod = a.as_matrix() * b.as_matrix();
    let n = prod.nrows();
    let svd = SVD::try_new(prod, false, false, f64::EPSILON, 1000 * n.max(1))
        .ok_or(Error::NoConvergence { dim: n })?;
    Ok(svd.singular_values.sum().clamp(0.0, 1.0))
}
