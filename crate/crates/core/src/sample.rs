//! Seeded random generators for valid covariances and test matrices.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::car::{CarCovariance, CarStatePair};
use crate::ccr::{validate_ccr, CcrCovariance, SymplecticSpace};
use crate::error::Result;
use crate::matcore::{c, CMatrix, HermitianMatrix, SkewMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_real(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_complex(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// signs of `diag(R)` absorbed).
pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let qr = gaussian_real(rng, n, n).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `O (⊕_k S_{μ_k}) Oᵀ` with `μ_k` uniform in `(-1/2, 1/2)` and `O` Haar.
pub fn random_car(rng: &mut impl Rng, n_modes: usize) -> CarCovariance {
    let mus: Vec<f64> = (0..n_modes).map(|_| rng.random_range(-0.5..0.5)).collect();
    rotated_blocks(rng, &mus)
}

fn rotated_blocks(rng: &mut impl Rng, mus: &[f64]) -> CarCovariance {
    let blocks = mus
        .iter()
        .map(|&m| CarCovariance::mu_block(m).expect("|μ| ≤ 1/2"))
        .reduce(|a, b| a.direct_sum(&b))
        .expect("at least one mode");
    let o = random_orthogonal(rng, 2 * mus.len());
    blocks.rotated(&o).expect("orthogonal rotation preserves validity")
}

pub fn random_car_pair(rng: &mut impl Rng, n_modes: usize) -> CarStatePair {
    let s = random_car(rng, n_modes);
    let t = random_car(rng, n_modes);
    CarStatePair::new(s, t).expect("equal dimensions")
}

/// A pair with a common rotation whose first mode is Fock for `S` and
/// co-Fock for `T`, so the transition probability vanishes exactly.
pub fn singular_car_pair(rng: &mut impl Rng, n_modes: usize) -> CarStatePair {
    let mut mus: Vec<f64> = (0..n_modes).map(|_| rng.random_range(-0.5..0.5)).collect();
    let mut nus: Vec<f64> = (0..n_modes).map(|_| rng.random_range(-0.5..0.5)).collect();
    mus[0] = 0.5;
    nus[0] = -0.5;
    let o = random_orthogonal(rng, 2 * n_modes);
    let build = |v: &[f64]| {
        v.iter()
            .map(|&m| CarCovariance::mu_block(m).expect("|μ| ≤ 1/2"))
            .reduce(|a, b| a.direct_sum(&b))
            .expect("at least one mode")
            .rotated(&o)
            .expect("orthogonal rotation preserves validity")
    };
    CarStatePair::new(build(&mus), build(&nus)).expect("equal dimensions")
}

pub fn random_skew(rng: &mut impl Rng, dim: usize) -> SkewMatrix {
    let g = gaussian_complex(rng, dim, dim);
    SkewMatrix::from_upper(dim, |j, k| g[(j, k)])
}

/// `G G*` with `G` a complex Gaussian `dim x rank` matrix.
pub fn random_psd(rng: &mut impl Rng, dim: usize, rank: usize) -> HermitianMatrix {
    let g = gaussian_complex(rng, dim, rank);
    HermitianMatrix::symmetrized(&g * g.adjoint())
}

/// Positive definite with eigenvalues bounded below by `floor`.
pub fn random_pd(rng: &mut impl Rng, dim: usize, floor: f64) -> HermitianMatrix {
    let base = random_psd(rng, dim, dim);
    &base + &HermitianMatrix::identity(dim).scale(floor)
}

/// Complex Gaussian matrix, redrawn until `|det| > 1e-3`.
pub fn random_invertible(rng: &mut impl Rng, dim: usize) -> CMatrix {
    loop {
        let m = gaussian_complex(rng, dim, dim);
        if m.determinant().norm() > 1e-3 {
            return m;
        }
    }
}

/// Random real antisymmetric form of rank `2 * pairs` on `R^dim`, returned
/// with an orthonormal basis of its kernel as columns.
pub fn random_degenerate_space(
    rng: &mut impl Rng,
    dim: usize,
    pairs: usize,
) -> (SymplecticSpace, DMatrix<f64>) {
    assert!(2 * pairs <= dim);
    let o = random_orthogonal(rng, dim);
    let mut core = DMatrix::zeros(dim, dim);
    for j in 0..pairs {
        let w: f64 = rng.random_range(0.5..2.0);
        core[(2 * j, 2 * j + 1)] = w;
        core[(2 * j + 1, 2 * j)] = -w;
    }
    let sigma = &o * core * o.transpose();
    let kernel = o.columns(2 * pairs, dim - 2 * pairs).into_owned();
    (SymplecticSpace::new(sigma).expect("antisymmetric by construction"), kernel)
}

/// Random covariance over `space`: `R = X Xᵀ/dim + α I` with `α` the smallest
/// shift making `R + iσ/2 ⪰ 0`, plus `slack`. `slack = 0` lands on the
/// boundary of the state space.
pub fn random_ccr(rng: &mut impl Rng, space: &SymplecticSpace, slack: f64) -> Result<CcrCovariance> {
    let d = space.dim();
    let x = gaussian_real(rng, d, d);
    let r0 = &x * x.transpose() / d as f64;
    let s0 = HermitianMatrix::symmetrized(CMatrix::from_fn(d, d, |i, j| {
        c(r0[(i, j)], 0.5 * space.sigma()[(i, j)])
    }));
    let shift = (-s0.min_eigenvalue()?).max(0.0) + slack;
    validate_ccr(space, &(r0 + DMatrix::identity(d, d) * shift))
}

/// `P R P` with `P` the orthogonal projection removing the kernel
/// direction `h` of `σ`; the state then vanishes on the central element
/// generated by `h`.
pub fn kill_direction(cov: &CcrCovariance, h: &[f64]) -> Result<CcrCovariance> {
    let d = cov.dim();
    let v = nalgebra::DVector::from_row_slice(h).normalize();
    let p = DMatrix::identity(d, d) - &v * v.transpose();
    validate_ccr(cov.space(), &(&p * cov.r() * &p))
}
