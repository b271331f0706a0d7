//! Pfaffians of complex skew-symmetric matrices.
//!
//! Small matrices use the signed sum over perfect matchings, expanded along
//! the first row. Larger ones go through a Parlett-Reid `L T L^T`
//! tridiagonalization with partial pivoting.

use num_complex::Complex64;

use super::{c, CMatrix};
use crate::error::{Error, Result};

/// Largest dimension for which [`pfaffian`] uses the pairing expansion.
pub const PAIRING_MAX_DIM: usize = 10;

/// A complex skew-symmetric matrix, `A^T = -A` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix(CMatrix);

impl SkewMatrix {
    /// Antisymmetrizes `(m - m^T) / 2`.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::shape(
                "square matrix",
                format!("{}x{}", m.nrows(), m.ncols()),
            ));
        }
        let t = m.transpose();
        Ok(SkewMatrix((m - t) * c(0.5, 0.0)))
    }

    /// Builds the matrix from its strict upper triangle `upper(j, k)`, `j < k`.
    pub fn from_upper(dim: usize, upper: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        for j in 0..dim {
            for k in j + 1..dim {
                let v = upper(j, k);
                m[(j, k)] = v;
                m[(k, j)] = -v;
            }
        }
        SkewMatrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }
}

fn check_even(a: &SkewMatrix) -> Result<()> {
    if a.dim() % 2 == 1 {
        Err(Error::OddDimension { dim: a.dim() })
    } else {
        Ok(())
    }
}

/// Pfaffian; pairing expansion up to [`PAIRING_MAX_DIM`], tridiagonalization
/// beyond.
pub fn pfaffian(a: &SkewMatrix) -> Result<Complex64> {
    if a.dim() <= PAIRING_MAX_DIM {
        pfaffian_by_pairings(a)
    } else {
        pfaffian_tridiagonal(a)
    }
}

/// Signed sum over all perfect matchings of `{0, .., d-1}`, evaluated by the
/// recursive first-row expansion
/// `Pf(A) = Σ_j (-1)^{j+1} a_{0j} Pf(A without rows/cols 0, j)`.
///
/// Cost grows like `(d-1)!!`; there is no size cap, callers keep `d` small.
pub fn pfaffian_by_pairings(a: &SkewMatrix) -> Result<Complex64> {
    check_even(a)?;
    let idx: Vec<usize> = (0..a.dim()).collect();
    Ok(pairing_sum(&a.0, &idx))
}

fn pairing_sum(a: &CMatrix, idx: &[usize]) -> Complex64 {
    if idx.is_empty() {
        return c(1.0, 0.0);
    }
    let first = idx[0];
    let mut total = c(0.0, 0.0);
    let mut rest = Vec::with_capacity(idx.len() - 2);
    for p in 1..idx.len() {
        let entry = a[(first, idx[p])];
        if entry == c(0.0, 0.0) {
            continue;
        }
        rest.clear();
        rest.extend(idx[1..].iter().enumerate().filter(|&(q, _)| q + 1 != p).map(|(_, &i)| i));
        let term = entry * pairing_sum(a, &rest);
        if p % 2 == 1 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// Parlett-Reid elimination: congruences by unit lower-triangular matrices
/// and symmetric pivots reduce `A` to tridiagonal form, whose Pfaffian is the
/// product of its superdiagonal entries at even positions.
pub fn pfaffian_tridiagonal(a: &SkewMatrix) -> Result<Complex64> {
    check_even(a)?;
    let n = a.dim();
    let mut m = a.0.clone();
    let mut pf = c(1.0, 0.0);
    let mut k = 0;
    while k + 1 < n {
        // pivot: largest entry below the diagonal in column k
        let mut kp = k + 1;
        let mut best = m[(k + 1, k)].norm();
        for i in k + 2..n {
            let v = m[(i, k)].norm();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            m.swap_rows(k + 1, kp);
            m.swap_columns(k + 1, kp);
            pf = -pf;
        }
        if m[(k + 1, k)] == c(0.0, 0.0) {
            return Ok(c(0.0, 0.0));
        }
        let pivot = m[(k, k + 1)];
        pf *= pivot;
        if k + 2 < n {
            let tau: Vec<Complex64> = (k + 2..n).map(|j| m[(k, j)] / pivot).collect();
            let col: Vec<Complex64> = (k + 2..n).map(|i| m[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    let upd = tau[ii] * col[jj] - col[ii] * tau[jj];
                    m[(i, j)] += upd;
                }
            }
        }
        k += 2;
    }
    Ok(pf)
}
