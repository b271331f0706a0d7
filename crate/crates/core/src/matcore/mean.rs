//! Operator geometric mean of PSD matrices, including singular ones.
//!
//! For invertible `A` the mean is `A^{1/2} (A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}`.
//! When `A` or `B` is singular the mean lives on `K = ran A ∩ ran B`: both
//! matrices are shorted to `K` (Anderson's shorted operator, the Schur
//! complement of the block outside `K`) and the invertible formula is applied
//! there. This is the limit of `(A + εI) # (B + εI)` as `ε → 0`.

use super::{
    complement_basis, eig_h, meet_basis, CMatrix, EigH, HermitianMatrix, ProjectionMatrix,
    DEFAULT_CLAMP_TOL, DEFAULT_MEET_TOL,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct GeometricMean {
    pub mean: HermitianMatrix,
    pub rank_a: usize,
    pub rank_b: usize,
    /// Dimension of `ran A ∩ ran B`.
    pub common_rank: usize,
    /// True when the supports of `A` and `B` differ.
    pub support_mismatch: bool,
}

fn check_psd(eig: &EigH, scale: f64) -> Result<()> {
    match eig.values.first() {
        Some(&v) if v < -DEFAULT_CLAMP_TOL * scale => Err(Error::NotPsd { eigenvalue: v }),
        _ => Ok(()),
    }
}

/// Mean of two positive definite matrices of equal size.
fn mean_definite(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
    let ea = eig_h(a)?;
    let eb = eig_h(b)?;
    // sandwich with the better-conditioned factor
    let cond = |e: &EigH| e.values.first().copied().unwrap_or(1.0) / e.spectral_norm().max(f64::MIN_POSITIVE);
    let (outer, inner) = if cond(&ea) >= cond(&eb) { (ea, b) } else { (eb, a) };
    let half = outer.map(|v| v.max(0.0).sqrt());
    let inv_half = outer.map(|v| 1.0 / v.sqrt());
    let middle = inner.congruence(inv_half.as_matrix());
    let middle_sqrt = super::sqrt_psd(&middle, DEFAULT_CLAMP_TOL)?;
    Ok(middle_sqrt.congruence(half.as_matrix()))
}

/// Anderson shorted operator of `a` to the span of the orthonormal columns
/// `keep`, returned in those coordinates. `rest` spans the complement.
fn shorted(a: &HermitianMatrix, keep: &CMatrix, rest: &CMatrix, tol: f64) -> Result<HermitianMatrix> {
    let m = a.as_matrix();
    let a11 = keep.adjoint() * m * keep;
    if rest.ncols() == 0 {
        return Ok(HermitianMatrix::symmetrized(a11));
    }
    let a12 = keep.adjoint() * m * rest;
    let a22 = HermitianMatrix::symmetrized(rest.adjoint() * m * rest);
    let e22 = eig_h(&a22)?;
    let thr = tol * a.spectral_norm()?;
    let pinv = e22.map(|v| if v > thr { 1.0 / v } else { 0.0 });
    let schur = a11 - &a12 * pinv.as_matrix() * a12.adjoint();
    Ok(HermitianMatrix::symmetrized(schur))
}

/// Geometric mean `A # B` of PSD matrices.
///
/// `reg` is the relative eigenvalue threshold defining the supports of `A`
/// and `B` (relative to the larger of the two spectral norms).
pub fn geometric_mean(a: &HermitianMatrix, b: &HermitianMatrix, reg: f64) -> Result<GeometricMean> {
    if a.dim() != b.dim() {
        return Err(Error::shape(format!("dim {}", a.dim()), format!("dim {}", b.dim())));
    }
    let n = a.dim();
    let ea = eig_h(a)?;
    let eb = eig_h(b)?;
    let scale = ea.spectral_norm().max(eb.spectral_norm());
    check_psd(&ea, scale)?;
    check_psd(&eb, scale)?;
    let thr = reg * scale;
    let sa = ea.columns_where(|v| v > thr);
    let sb = eb.columns_where(|v| v > thr);
    let (rank_a, rank_b) = (sa.ncols(), sb.ncols());

    if rank_a == n && rank_b == n {
        return Ok(GeometricMean {
            mean: mean_definite(a, b)?,
            rank_a,
            rank_b,
            common_rank: n,
            support_mismatch: false,
        });
    }

    let pa = ProjectionMatrix::onto(&sa);
    let pb = ProjectionMatrix::onto(&sb);
    let (common, _) = meet_basis(pa.as_hermitian(), pb.as_hermitian(), DEFAULT_MEET_TOL)?;
    let common_rank = common.ncols();
    let support_mismatch = !(rank_a == rank_b && common_rank == rank_a);
    if common_rank == 0 {
        return Ok(GeometricMean {
            mean: HermitianMatrix::zeros(n),
            rank_a,
            rank_b,
            common_rank,
            support_mismatch,
        });
    }
    let rest = complement_basis(&common)?;
    let a_k = shorted(a, &common, &rest, reg)?;
    let b_k = shorted(b, &common, &rest, reg)?;
    let mean_k = mean_definite(&a_k, &b_k)?;
    let mean = HermitianMatrix::symmetrized(&common * mean_k.as_matrix() * common.adjoint());
    Ok(GeometricMean {
        mean,
        rank_a,
        rank_b,
        common_rank,
        support_mismatch,
    })
}
