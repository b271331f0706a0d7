//! Truncated bosonic Fock-space oracle for one or two modes.
//!
//! States are built from quadratic Hamiltonians (Gibbs states), directly as
//! thermal products, or as the single-mode squeezed vacuum. The covariance
//! is read off the second moments and the overlap `tr(√ρ √τ)` is computed
//! at increasing cutoffs until it settles.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::car_oracle::{overlap, DensityMatrix};
use crate::ccr::{validate_ccr, CcrCovariance, SymplecticSpace};
use crate::error::{Error, Result};
use crate::matcore::{c, CMatrix, HermitianMatrix, HERMITIAN_TOL};

pub const MAX_BOSON_MODES: usize = 2;
/// Largest Fock-space dimension `(cutoff + 1)^n` the oracle will build.
pub const MAX_FOCK_DIM: usize = 2048;
pub const DEFAULT_OVERLAP_TOL: f64 = 1e-7;
pub const CUTOFF_SCHEDULE: [usize; 4] = [20, 40, 80, 120];

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Ladder and quadrature operators on `(cutoff + 1)^n` states, mode 0 being
/// the most significant tensor factor.
#[derive(Debug, Clone)]
pub struct BosonOps {
    pub n_modes: usize,
    pub cutoff: usize,
    pub a: Vec<CMatrix>,
    /// `(a + a†)/√2`
    pub q: Vec<CMatrix>,
    /// `(a - a†)/(i√2)`
    pub p: Vec<CMatrix>,
}

fn fock_dim(n_modes: usize, cutoff: usize) -> Option<usize> {
    (cutoff + 1).checked_pow(n_modes as u32)
}

fn check_size(n_modes: usize, cutoff: usize) -> Result<usize> {
    if n_modes == 0 || n_modes > MAX_BOSON_MODES {
        return Err(Error::SizeCap { what: "boson oracle modes", value: n_modes, cap: MAX_BOSON_MODES });
    }
    if cutoff < 2 {
        return Err(Error::shape("cutoff >= 2", cutoff.to_string()));
    }
    match fock_dim(n_modes, cutoff) {
        Some(d) if d <= MAX_FOCK_DIM => Ok(d),
        other => Err(Error::SizeCap {
            what: "Fock-space dimension",
            value: other.unwrap_or(usize::MAX),
            cap: MAX_FOCK_DIM,
        }),
    }
}

pub fn boson_ops(n_modes: usize, cutoff: usize) -> Result<BosonOps> {
    check_size(n_modes, cutoff)?;
    let m = cutoff + 1;
    let single = CMatrix::from_fn(m, m, |i, j| if j == i + 1 { c((j as f64).sqrt(), 0.0) } else { c(0.0, 0.0) });
    let id = CMatrix::identity(m, m);
    let a: Vec<CMatrix> = (0..n_modes)
        .map(|mode| {
            (0..n_modes).fold(CMatrix::identity(1, 1), |acc, k| kron(&acc, if k == mode { &single } else { &id }))
        })
        .collect();
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let q = a.iter().map(|x| (x + x.adjoint()) * c(r2, 0.0)).collect();
    let p = a.iter().map(|x| (x - x.adjoint()) * c(0.0, -r2)).collect();
    Ok(BosonOps { n_modes, cutoff, a, q, p })
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `H = Σ ω_jk a_j† a_k + ½ Σ (ξ_jk a_j† a_k† + conj(ξ_jk) a_k a_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    omega: CMatrix,
    xi: CMatrix,
}

impl QuadraticHamiltonian {
    /// Requires `[[ω, ξ], [conj ξ, conj ω]]` positive definite, which makes
    /// `H` bounded below with a gap.
    pub fn new(omega: CMatrix, xi: CMatrix) -> Result<Self> {
        let n = omega.nrows();
        if !omega.is_square() || xi.shape() != (n, n) {
            return Err(Error::shape(
                format!("{n}x{n} coefficients"),
                format!("{:?} and {:?}", omega.shape(), xi.shape()),
            ));
        }
        if n == 0 || n > MAX_BOSON_MODES {
            return Err(Error::SizeCap { what: "boson oracle modes", value: n, cap: MAX_BOSON_MODES });
        }
        let omega = HermitianMatrix::new(omega)?.into_matrix();
        let xi_asym = max_abs(&(&xi - xi.transpose()));
        if xi_asym > HERMITIAN_TOL * max_abs(&xi).max(1.0) {
            return Err(Error::shape("symmetric squeezing matrix", format!("|ξ - ξᵀ| = {xi_asym:.3e}")));
        }
        let xi = (&xi + xi.transpose()) * c(0.5, 0.0);
        let mut block = CMatrix::zeros(2 * n, 2 * n);
        block.view_mut((0, 0), (n, n)).copy_from(&omega);
        block.view_mut((0, n), (n, n)).copy_from(&xi);
        block.view_mut((n, 0), (n, n)).copy_from(&xi.map(|z| z.conj()));
        block.view_mut((n, n), (n, n)).copy_from(&omega.map(|z| z.conj()));
        let lowest = HermitianMatrix::symmetrized(block).min_eigenvalue()?;
        if lowest <= 0.0 {
            return Err(Error::Gapless { min_eigenvalue: lowest });
        }
        Ok(QuadraticHamiltonian { omega, xi })
    }

    /// `ω = β`, `ξ = 0` on one mode.
    pub fn number(beta: f64) -> Result<Self> {
        Self::new(CMatrix::from_element(1, 1, c(beta, 0.0)), CMatrix::zeros(1, 1))
    }

    pub fn n_modes(&self) -> usize {
        self.omega.nrows()
    }

    pub fn matrix(&self, ops: &BosonOps) -> HermitianMatrix {
        let n = self.n_modes();
        let dim = ops.a[0].nrows();
        let mut h = CMatrix::zeros(dim, dim);
        for j in 0..n {
            let aj_dag = ops.a[j].adjoint();
            for k in 0..n {
                if self.omega[(j, k)] != c(0.0, 0.0) {
                    h += &aj_dag * &ops.a[k] * self.omega[(j, k)];
                }
                if self.xi[(j, k)] != c(0.0, 0.0) {
                    let pair = &aj_dag * ops.a[k].adjoint() * (self.xi[(j, k)] * 0.5);
                    h += &pair + pair.adjoint();
                }
            }
        }
        HermitianMatrix::symmetrized(h)
    }
}

/// A density matrix on a truncated Fock space.
#[derive(Debug, Clone)]
pub struct TruncatedState {
    pub n_modes: usize,
    pub cutoff: usize,
    pub density: DensityMatrix,
    /// Population of the basis states with some occupation equal to the
    /// cutoff.
    pub edge_weight: f64,
}

fn edge_weight(rho: &CMatrix, n_modes: usize, cutoff: usize) -> f64 {
    let m = cutoff + 1;
    (0..rho.nrows())
        .filter(|&idx| {
            let mut rest = idx;
            (0..n_modes).any(|_| {
                let occ = rest % m;
                rest /= m;
                occ == cutoff
            })
        })
        .map(|idx| rho[(idx, idx)].re)
        .sum()
}

impl TruncatedState {
    fn from_density(rho: CMatrix, n_modes: usize, cutoff: usize) -> Result<Self> {
        let trace: f64 = rho.diagonal().iter().map(|z| z.re).sum();
        let rho = rho * c(1.0 / trace, 0.0);
        let edge = edge_weight(&rho, n_modes, cutoff);
        let density = DensityMatrix::new(HermitianMatrix::symmetrized(rho))?;
        Ok(TruncatedState { n_modes, cutoff, density, edge_weight: edge })
    }
}

/// `exp(-H)/Z` at the given cutoff.
pub fn gaussian_density(h: &QuadraticHamiltonian, cutoff: usize) -> Result<TruncatedState> {
    let ops = boson_ops(h.n_modes(), cutoff)?;
    let eig = h.matrix(&ops).eig()?;
    let ground = eig.values[0];
    if !ground.is_finite() {
        return Err(Error::Gapless { min_eigenvalue: ground });
    }
    let rho = eig.map(|v| (ground - v).exp());
    TruncatedState::from_density(rho.into_matrix(), h.n_modes(), cutoff)
}

/// Sources of Gaussian states for the oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum GaussianSpec {
    Gibbs(QuadraticHamiltonian),
    /// Product of thermal modes with ratios `q_j = e^{-β_j}` in `[0, 1)`;
    /// `q = 0` is the vacuum.
    Thermal(Vec<f64>),
    /// Single-mode squeezed vacuum with parameter `r`.
    SqueezedVacuum(f64),
}

impl GaussianSpec {
    pub fn n_modes(&self) -> usize {
        match self {
            GaussianSpec::Gibbs(h) => h.n_modes(),
            GaussianSpec::Thermal(qs) => qs.len(),
            GaussianSpec::SqueezedVacuum(_) => 1,
        }
    }

    pub fn at_cutoff(&self, cutoff: usize) -> Result<TruncatedState> {
        match self {
            GaussianSpec::Gibbs(h) => gaussian_density(h, cutoff),
            GaussianSpec::Thermal(qs) => thermal_state(qs, cutoff),
            GaussianSpec::SqueezedVacuum(r) => squeezed_vacuum(*r, cutoff),
        }
    }

    /// Covariance of the untruncated state where it is known in closed form;
    /// Gibbs states are read off the density at `cutoff`.
    pub fn covariance(&self, cutoff: usize) -> Result<CcrCovariance> {
        match self {
            GaussianSpec::Gibbs(_) => covariance_of_density(&self.at_cutoff(cutoff)?),
            GaussianSpec::Thermal(qs) => {
                if let Some(bad) = qs.iter().find(|q| !(0.0..1.0).contains(*q)) {
                    return Err(Error::Gapless { min_eigenvalue: -bad.ln() });
                }
                let cs: Vec<f64> = qs.iter().map(|&q| thermal_scale(q)).collect();
                CcrCovariance::thermal(&cs)
            }
            GaussianSpec::SqueezedVacuum(r) => {
                let r = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                    (-2.0 * r).exp() / 2.0,
                    (2.0 * r).exp() / 2.0,
                ]));
                CcrCovariance::new(&SymplecticSpace::standard(1), r)
            }
        }
    }
}

fn thermal_state(qs: &[f64], cutoff: usize) -> Result<TruncatedState> {
    let dim = check_size(qs.len(), cutoff)?;
    if let Some(bad) = qs.iter().find(|q| !(0.0..1.0).contains(*q)) {
        return Err(Error::Gapless { min_eigenvalue: -bad.ln() });
    }
    let m = cutoff + 1;
    let mut rho = CMatrix::zeros(dim, dim);
    for idx in 0..dim {
        let mut rest = idx;
        let mut w = 1.0;
        for q in qs.iter().rev() {
            w *= q.powi((rest % m) as i32);
            rest /= m;
        }
        rho[(idx, idx)] = c(w, 0.0);
    }
    TruncatedState::from_density(rho, qs.len(), cutoff)
}

fn squeezed_vacuum(r: f64, cutoff: usize) -> Result<TruncatedState> {
    let dim = check_size(1, cutoff)?;
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    let ratio = -r.tanh();
    let mut amp = 1.0;
    psi[0] = c(1.0, 0.0);
    for n in 1..=cutoff / 2 {
        let two_n = 2.0 * n as f64;
        amp *= ratio * (two_n * (two_n - 1.0)).sqrt() / two_n;
        psi[2 * n] = c(amp, 0.0);
    }
    let v = nalgebra::DVector::from_vec(psi);
    TruncatedState::from_density(&v * v.adjoint(), 1, cutoff)
}

/// Second moments `R_jk = Re tr(ρ x_j x_k)` with `x = (q_1..q_n, p_1..p_n)`,
/// validated against the standard symplectic form.
pub fn covariance_of_density(state: &TruncatedState) -> Result<CcrCovariance> {
    let ops = boson_ops(state.n_modes, state.cutoff)?;
    let xs: Vec<&CMatrix> = ops.q.iter().chain(ops.p.iter()).collect();
    let rho = state.density.as_matrix();
    let rho_x: Vec<CMatrix> = xs.iter().map(|x| rho * *x).collect();
    let d = xs.len();
    let r = DMatrix::from_fn(d, d, |j, k| {
        rho_x[j].iter().zip(xs[k].transpose().iter()).map(|(a, b)| (a * b).re).sum::<f64>()
    });
    let r = (&r + r.transpose()) * 0.5;
    validate_ccr(&SymplecticSpace::standard(state.n_modes), &r)
}

/// Overlap at the last cutoff visited, with the change from the previous one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapEstimate {
    pub value: f64,
    pub cutoff: usize,
    pub increment: f64,
}

/// `tr(√ρ √τ)` on the default cutoff schedule.
pub fn overlap_ccr(rho: &GaussianSpec, tau: &GaussianSpec, tol: f64) -> Result<OverlapEstimate> {
    overlap_ccr_on(rho, tau, tol, &CUTOFF_SCHEDULE)
}

/// `tr(√ρ √τ)` evaluated at each cutoff of `schedule` that fits the size
/// cap, stopping once two successive values differ by less than `tol`.
pub fn overlap_ccr_on(
    rho: &GaussianSpec,
    tau: &GaussianSpec,
    tol: f64,
    schedule: &[usize],
) -> Result<OverlapEstimate> {
    let n = rho.n_modes();
    if tau.n_modes() != n {
        return Err(Error::shape(format!("{n} modes"), format!("{} modes", tau.n_modes())));
    }
    let usable: Vec<usize> = schedule.iter().copied().filter(|&k| check_size(n, k).is_ok()).collect();
    if usable.len() < 2 {
        let first = schedule.first().copied().unwrap_or(0);
        check_size(n, first)?;
        return Err(Error::SizeCap {
            what: "cutoff steps within the Fock-space cap",
            value: usable.len(),
            cap: 2,
        });
    }
    let mut prev: Option<f64> = None;
    let mut last = OverlapEstimate { value: f64::NAN, cutoff: 0, increment: f64::INFINITY };
    for cutoff in usable {
        let value = overlap(&rho.at_cutoff(cutoff)?.density, &tau.at_cutoff(cutoff)?.density)?;
        let increment = prev.map_or(f64::INFINITY, |p| (value - p).abs());
        log::debug!("overlap at cutoff {cutoff}: {value} (increment {increment:.3e})");
        last = OverlapEstimate { value, cutoff, increment };
        if increment < tol {
            return Ok(last);
        }
        prev = Some(value);
    }
    Err(Error::Inconclusive { increment: last.increment, cutoff: last.cutoff })
}

/// Overlap of two single-mode thermal states with ratios `q1`, `q2`.
pub fn thermal_overlap_closed_form(q1: f64, q2: f64) -> f64 {
    ((1.0 - q1) * (1.0 - q2)).sqrt() / (1.0 - (q1 * q2).sqrt())
}

/// `c = (1 + q)/(1 - q)`, the thermal covariance scale `R = (c/2) I`.
pub fn thermal_scale(q: f64) -> f64 {
    (1.0 + q) / (1.0 - q)
}
