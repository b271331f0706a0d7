//! Dense Hermitian and skew-symmetric matrix calculus.
//!
//! Every matrix function here goes through an eigendecomposition of an
//! explicitly symmetrized input, so results are deterministic and share one
//! error model. Eigenvalues below the PSD clamp threshold are treated as
//! exact zeros when supports are computed.

mod mean;
mod pfaffian;

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use mean::{geometric_mean, GeometricMean};
pub use pfaffian::{
    pfaffian, pfaffian_by_pairings, pfaffian_tridiagonal, SkewMatrix, PAIRING_MAX_DIM,
};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative tolerance for the Hermitian check on raw input.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Relative threshold below which negative eigenvalues are clamped to zero.
pub const DEFAULT_CLAMP_TOL: f64 = 1e-10;
/// Relative eigenvalue threshold defining the support of a PSD matrix.
pub const DEFAULT_SUPPORT_TOL: f64 = 1e-10;
/// Eigenvalue window below 2 used by [`projection_meet`].
pub const DEFAULT_MEET_TOL: f64 = 1e-8;

const MAX_SWEEPS_PER_DIM: usize = 1000;

pub(crate) const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Eigenvalues at the rounding level of a matrix with spectral scale `scale`.
pub(crate) fn noise_floor(dim: usize, scale: f64) -> f64 {
    16.0 * f64::EPSILON * dim.max(1) as f64 * scale
}

/// A complex Hermitian matrix, stored exactly symmetrized.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Checks hermiticity within `1e-10 * (1 + max |entry|)` and symmetrizes.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::shape(
                "square matrix",
                format!("{}x{}", m.nrows(), m.ncols()),
            ));
        }
        let max_abs = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let violation = max_hermitian_violation(&m);
        if violation > HERMITIAN_TOL * (1.0 + max_abs) {
            return Err(Error::NotHermitian {
                max_violation: violation,
            });
        }
        Ok(Self::symmetrized(m))
    }

    /// `(m + m*) / 2` without any check. Panics on non-square input.
    pub fn symmetrized(m: CMatrix) -> Self {
        assert!(m.is_square(), "symmetrized() needs a square matrix");
        let adj = m.adjoint();
        HermitianMatrix((m + adj) * c(0.5, 0.0))
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|x| c(x, 0.0)))
    }

    pub fn identity(dim: usize) -> Self {
        HermitianMatrix(CMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix(CMatrix::zeros(dim, dim))
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&x| c(x, 0.0)));
        HermitianMatrix(CMatrix::from_diagonal(&d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Entrywise complex conjugate, which is again Hermitian.
    pub fn conj(&self) -> Self {
        HermitianMatrix(conj_matrix(&self.0))
    }

    /// `C X C*`, the congruence of this matrix by an arbitrary `C`.
    pub fn congruence(&self, c: &CMatrix) -> Self {
        Self::symmetrized(c * &self.0 * c.adjoint())
    }

    /// `K* X K` for a matrix `K` with orthonormal columns.
    pub fn compress(&self, basis: &CMatrix) -> Self {
        Self::symmetrized(basis.adjoint() * &self.0 * basis)
    }

    pub fn scale(&self, factor: f64) -> Self {
        HermitianMatrix(&self.0 * c(factor, 0.0))
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Sesquilinear form value `x* X x`.
    pub fn form(&self, x: &CVector) -> f64 {
        (x.adjoint() * &self.0 * x)[(0, 0)].re
    }

    pub fn eig(&self) -> Result<EigH> {
        eig_h(self)
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> Result<f64> {
        Ok(self.eig()?.spectral_norm())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eig()?.values.first().copied().unwrap_or(0.0))
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(self.eig()?.values.last().copied().unwrap_or(0.0))
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scale(rhs)
    }
}

fn max_hermitian_violation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for k in j..n {
            worst = worst.max((m[(j, k)] - m[(k, j)].conj()).norm());
        }
    }
    worst
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct EigH {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl EigH {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn spectral_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `V f(Λ) V*`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let n = self.dim();
        let scaled = DMatrix::from_fn(n, n, |i, j| self.vectors[(i, j)] * f(self.values[j]));
        HermitianMatrix::symmetrized(scaled * self.vectors.adjoint())
    }

    /// Eigenvector columns whose eigenvalue satisfies `keep`.
    pub fn columns_where(&self, keep: impl Fn(f64) -> bool) -> CMatrix {
        let idx: Vec<usize> = (0..self.dim()).filter(|&j| keep(self.values[j])).collect();
        let n = self.dim();
        CMatrix::from_fn(n, idx.len(), |i, j| self.vectors[(i, idx[j])])
    }

    /// Orthonormal basis of the span of eigenvectors with eigenvalue above
    /// `tol` times the spectral norm.
    pub fn support_basis(&self, tol: f64) -> CMatrix {
        let thr = tol * self.spectral_norm();
        self.columns_where(|v| v > thr)
    }

    pub fn kernel_basis(&self, tol: f64) -> CMatrix {
        let thr = tol * self.spectral_norm();
        self.columns_where(|v| v <= thr)
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
pub fn eig_h(h: &HermitianMatrix) -> Result<EigH> {
    let n = h.dim();
    if n == 0 {
        return Ok(EigH {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::try_new(h.0.clone(), f64::EPSILON, MAX_SWEEPS_PER_DIM * n)
        .ok_or(Error::NoConvergence { dim: n })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(EigH { values, vectors })
}

/// Applies `f` to the eigenvalues of a PSD matrix after clamping.
///
/// Eigenvalues below `-clamp_tol * ||H||` are rejected; the remaining
/// negative ones and those at the rounding level are set to zero.
pub fn psd_function(
    h: &HermitianMatrix,
    clamp_tol: f64,
    f: impl Fn(f64) -> f64,
) -> Result<HermitianMatrix> {
    let eig = eig_h(h)?;
    let scale = eig.spectral_norm();
    if let Some(&lowest) = eig.values.first() {
        if lowest < -clamp_tol * scale {
            return Err(Error::NotPsd { eigenvalue: lowest });
        }
    }
    let floor = noise_floor(h.dim(), scale);
    Ok(eig.map(|v| if v <= floor { f(0.0) } else { f(v) }))
}

/// PSD square root.
pub fn sqrt_psd(h: &HermitianMatrix, clamp_tol: f64) -> Result<HermitianMatrix> {
    psd_function(h, clamp_tol, f64::sqrt)
}

/// Entrywise complex conjugation.
pub fn conj_matrix(x: &CMatrix) -> CMatrix {
    x.map(|z| z.conj())
}

/// Hilbert-Schmidt (Frobenius) norm.
pub fn hs_norm(x: &CMatrix) -> f64 {
    x.norm()
}

/// An orthogonal projection.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix(HermitianMatrix);

impl ProjectionMatrix {
    /// Accepts `P` when `||P^2 - P||_HS <= 1e-8 * dim` and every eigenvalue is
    /// within `1e-8` of 0 or 1.
    pub fn new(p: HermitianMatrix) -> Result<Self> {
        let defect = projection_defect(&p);
        let dim = p.dim().max(1) as f64;
        if defect > 1e-8 * dim {
            return Err(Error::NotProjection { defect });
        }
        let eig = p.eig()?;
        if let Some(bad) = eig
            .values
            .iter()
            .find(|&&v| v.abs() > 1e-8 && (v - 1.0).abs() > 1e-8)
        {
            return Err(Error::NotProjection {
                defect: bad.abs().min((bad - 1.0).abs()),
            });
        }
        Ok(ProjectionMatrix(p))
    }

    /// Projection onto the span of orthonormal columns.
    pub fn onto(basis: &CMatrix) -> Self {
        ProjectionMatrix(HermitianMatrix::symmetrized(basis * basis.adjoint()))
    }

    pub fn zeros(dim: usize) -> Self {
        ProjectionMatrix(HermitianMatrix::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Rank, read off the trace.
    pub fn rank(&self) -> usize {
        self.0.trace().round().max(0.0) as usize
    }

    /// `I - P`.
    pub fn complement(&self) -> Self {
        ProjectionMatrix(&HermitianMatrix::identity(self.dim()) - &self.0)
    }

    pub fn defect(&self) -> f64 {
        projection_defect(&self.0)
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn as_matrix(&self) -> &CMatrix {
        self.0.as_matrix()
    }
}

/// `||P^2 - P||_HS`.
pub fn projection_defect(p: &HermitianMatrix) -> f64 {
    let m = p.as_matrix();
    hs_norm(&(m * m - m))
}

/// Projection onto the span of eigenvectors with eigenvalue above
/// `tol * ||H||`.
pub fn support_projection(h: &HermitianMatrix, tol: f64) -> Result<ProjectionMatrix> {
    Ok(ProjectionMatrix::onto(&h.eig()?.support_basis(tol)))
}

/// Orthonormal basis of `ran P ∩ ran R`: eigenvectors of `P + R` with
/// eigenvalue in `[2 - tol, 2]`.
pub fn meet_basis(p: &HermitianMatrix, r: &HermitianMatrix, tol: f64) -> Result<(CMatrix, CMatrix)> {
    if p.dim() != r.dim() {
        return Err(Error::shape(format!("dim {}", p.dim()), format!("dim {}", r.dim())));
    }
    let eig = (p + r).eig()?;
    Ok((
        eig.columns_where(|v| v >= 2.0 - tol),
        eig.columns_where(|v| v < 2.0 - tol),
    ))
}

/// The meet `P ∧ R`, the projection onto `ran P ∩ ran R`.
pub fn projection_meet(
    p: &ProjectionMatrix,
    r: &ProjectionMatrix,
    tol: f64,
) -> Result<ProjectionMatrix> {
    let (basis, _) = meet_basis(p.as_hermitian(), r.as_hermitian(), tol)?;
    Ok(ProjectionMatrix::onto(&basis))
}

/// Ratio operator of `X` relative to `G`, expressed in an orthonormal basis
/// of `support(G)`.
#[derive(Debug, Clone)]
pub struct SupportRatio {
    /// Orthonormal basis of `support(G)`, `d x r`.
    pub basis: CMatrix,
    /// Eigenvalues of `G` on its support, matching the columns of `basis`.
    pub g_values: Vec<f64>,
    /// `Λ^{-1/2} K* X K Λ^{-1/2}`, an `r x r` Hermitian matrix.
    pub ratio: HermitianMatrix,
}

impl SupportRatio {
    /// The pseudo-inverse square root `G^{-1/2}` restricted to the support,
    /// as the `d x r` map `K Λ^{-1/2}`.
    pub fn inverse_sqrt_map(&self) -> CMatrix {
        let mut w = self.basis.clone();
        for (j, &g) in self.g_values.iter().enumerate() {
            w.column_mut(j).scale_mut(1.0 / g.sqrt());
        }
        w
    }

    /// The ratio padded back to the full space: `G^{-1/2} X G^{-1/2}`.
    pub fn padded(&self) -> HermitianMatrix {
        let k = &self.basis;
        HermitianMatrix::symmetrized(k * self.ratio.as_matrix() * k.adjoint())
    }
}

/// `G^{-1/2} X G^{-1/2}` on `support(G)` together with its support basis.
pub fn ratio_on_support(
    x: &HermitianMatrix,
    g: &HermitianMatrix,
    tol: f64,
) -> Result<SupportRatio> {
    if x.dim() != g.dim() {
        return Err(Error::shape(format!("dim {}", g.dim()), format!("dim {}", x.dim())));
    }
    let eig = g.eig()?;
    let thr = tol * eig.spectral_norm();
    let x_scale = x.spectral_norm()?.max(eig.spectral_norm());
    for j in 0..eig.dim() {
        if eig.values[j] > thr {
            continue;
        }
        let h = eig.vectors.column(j).into_owned();
        let leak = (x.as_matrix() * &h).norm();
        if leak > tol.sqrt() * x_scale.max(f64::MIN_POSITIVE) {
            return Err(Error::SupportViolation {
                witness: h.iter().copied().collect(),
            });
        }
    }
    let kept: Vec<usize> = (0..eig.dim()).filter(|&j| eig.values[j] > thr).collect();
    let n = g.dim();
    let basis = CMatrix::from_fn(n, kept.len(), |i, j| eig.vectors[(i, kept[j])]);
    let g_values: Vec<f64> = kept.iter().map(|&j| eig.values[j]).collect();
    let mut out = SupportRatio {
        basis,
        g_values,
        ratio: HermitianMatrix::zeros(kept.len()),
    };
    let w = out.inverse_sqrt_map();
    out.ratio = HermitianMatrix::symmetrized(w.adjoint() * x.as_matrix() * &w);
    Ok(out)
}

/// `G^{-1/2} X G^{-1/2}` computed on `support(G)` and padded by zero.
pub fn ratio(x: &HermitianMatrix, g: &HermitianMatrix) -> Result<HermitianMatrix> {
    Ok(ratio_on_support(x, g, DEFAULT_SUPPORT_TOL)?.padded())
}

/// Orthonormal basis of the complement of the span of orthonormal columns.
pub(crate) fn complement_basis(basis: &CMatrix) -> Result<CMatrix> {
    let p = ProjectionMatrix::onto(basis).complement();
    Ok(p.as_hermitian().eig()?.columns_where(|v| v > 0.5))
}
