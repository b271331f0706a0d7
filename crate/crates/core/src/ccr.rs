//! Bosonic quasi-free states.
//!
//! A state on the Weyl algebra of a real space `(V, σ)` is described by a
//! covariance form `S = R + iσ/2` on the complexification, with `R` real
//! symmetric and `S ⪰ 0`. The characteristic function is
//! `φ(e^{ix}) = exp(-xᵀ R x / 2)`. The symplectic form may be degenerate,
//! down to `σ = 0` where the algebra is commutative and states are centered
//! Gaussian measures.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{
    c, geometric_mean, ratio, ratio_on_support, sqrt_psd, CMatrix, EigH, HermitianMatrix,
    DEFAULT_CLAMP_TOL, DEFAULT_SUPPORT_TOL,
};
use crate::verdict::{Reason, VerdictKind};

/// Relative tolerance for `S ⪰ 0`.
pub const CCR_TOL: f64 = 1e-10;
/// Default threshold on `t` separating the two verdicts.
pub const CLASSIFY_TOL: f64 = 1e-12;
/// Condition bound for mutual domination of two metrics.
pub const METRIC_CONDITION_CAP: f64 = 1e12;
const CENTRAL_RATIO_TOL: f64 = 1e-10;
const CENTRAL_FORM_TOL: f64 = 1e-8;
const SUPPORT_MATCH_TOL: f64 = 1e-8;

fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| c(x, 0.0))
}

/// A real vector space with a possibly degenerate antisymmetric form.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpace {
    sigma: DMatrix<f64>,
}

impl SymplecticSpace {
    pub fn new(sigma: DMatrix<f64>) -> Result<Self> {
        if !sigma.is_square() {
            return Err(Error::shape(
                "square symplectic form",
                format!("{}x{}", sigma.nrows(), sigma.ncols()),
            ));
        }
        let scale = sigma.amax().max(1.0);
        let defect = (&sigma + sigma.transpose()).amax();
        if defect > 1e-10 * scale {
            return Err(Error::shape(
                "antisymmetric symplectic form",
                format!("|σ + σᵀ| = {defect:.3e}"),
            ));
        }
        let sigma = (&sigma - sigma.transpose()) * 0.5;
        Ok(SymplecticSpace { sigma })
    }

    /// `[[0, I], [-I, 0]]` in the coordinates `(q_1..q_n, p_1..p_n)`.
    pub fn standard(n_modes: usize) -> Self {
        let d = 2 * n_modes;
        let mut sigma = DMatrix::zeros(d, d);
        for j in 0..n_modes {
            sigma[(j, n_modes + j)] = 1.0;
            sigma[(n_modes + j, j)] = -1.0;
        }
        SymplecticSpace { sigma }
    }

    /// `σ = 0`.
    pub fn commutative(dim: usize) -> Self {
        SymplecticSpace { sigma: DMatrix::zeros(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn direct_sum(&self, other: &SymplecticSpace) -> SymplecticSpace {
        SymplecticSpace { sigma: block_diag(&self.sigma, &other.sigma) }
    }

    fn same_as(&self, other: &SymplecticSpace) -> bool {
        self.dim() == other.dim()
            && (&self.sigma - &other.sigma).amax() <= 1e-12 * self.sigma.amax().max(1.0)
    }
}

fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (m, m)).copy_from(b);
    out
}

/// A validated covariance form `S = R + iσ/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CcrCovariance {
    space: SymplecticSpace,
    r: DMatrix<f64>,
    s: HermitianMatrix,
}

pub fn validate_ccr(space: &SymplecticSpace, r: &DMatrix<f64>) -> Result<CcrCovariance> {
    let d = space.dim();
    if r.nrows() != d || r.ncols() != d {
        return Err(Error::shape(format!("{d}x{d}"), format!("{}x{}", r.nrows(), r.ncols())));
    }
    let scale = r.amax().max(1.0);
    let asym = (r - r.transpose()).amax();
    if asym > crate::matcore::HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { max_violation: asym });
    }
    let r = (r + r.transpose()) * 0.5;
    let s = HermitianMatrix::symmetrized(CMatrix::from_fn(d, d, |i, j| {
        c(r[(i, j)], 0.5 * space.sigma[(i, j)])
    }));
    let lowest = s.min_eigenvalue()?;
    if lowest < -CCR_TOL * s.spectral_norm()?.max(1.0) {
        return Err(Error::NotCovarianceForm { min_eigenvalue: lowest });
    }
    Ok(CcrCovariance { space: space.clone(), r, s })
}

impl CcrCovariance {
    pub fn new(space: &SymplecticSpace, r: DMatrix<f64>) -> Result<Self> {
        validate_ccr(space, &r)
    }

    /// Reads `σ = 2 Im S` and `R = Re S` off a complex Hermitian matrix.
    pub fn from_hermitian(s: &CMatrix) -> Result<Self> {
        let h = HermitianMatrix::new(s.clone())?;
        let sigma = h.as_matrix().map(|z| 2.0 * z.im);
        let r = h.as_matrix().map(|z| z.re);
        validate_ccr(&SymplecticSpace::new(sigma)?, &r)
    }

    /// Single-mode thermal state `R = (c/2) I`, `c ≥ 1`; `c = 1` is the vacuum.
    pub fn thermal_mode(c: f64) -> Result<Self> {
        Self::thermal(&[c])
    }

    /// Product of thermal modes on the standard space.
    pub fn thermal(cs: &[f64]) -> Result<Self> {
        let n = cs.len();
        let diag: Vec<f64> = cs.iter().chain(cs.iter()).map(|c| c / 2.0).collect();
        validate_ccr(
            &SymplecticSpace::standard(n),
            &DMatrix::from_diagonal(&DVector::from_vec(diag)),
        )
    }

    pub fn dim(&self) -> usize {
        self.r.nrows()
    }

    pub fn space(&self) -> &SymplecticSpace {
        &self.space
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn s(&self) -> &HermitianMatrix {
        &self.s
    }

    /// `S + conj(S) = 2R`.
    pub fn metric(&self) -> HermitianMatrix {
        HermitianMatrix::symmetrized(to_complex(&(&self.r * 2.0)))
    }

    /// Block-diagonal covariance on the direct sum of the spaces.
    pub fn direct_sum(&self, other: &CcrCovariance) -> CcrCovariance {
        let space = self.space.direct_sum(&other.space);
        let r = block_diag(&self.r, &other.r);
        let d = r.nrows();
        let s = HermitianMatrix::symmetrized(CMatrix::from_fn(d, d, |i, j| {
            c(r[(i, j)], 0.5 * space.sigma[(i, j)])
        }));
        CcrCovariance { space, r, s }
    }

    /// Value of the state on the Weyl unitary `e^{ix}`.
    pub fn char_value(&self, x: &DVector<f64>) -> f64 {
        (-0.5 * (x.transpose() * &self.r * x)[(0, 0)]).exp()
    }
}

fn same_space(s: &CcrCovariance, t: &CcrCovariance) -> Result<()> {
    if !s.space.same_as(&t.space) {
        return Err(Error::shape("covariances over the same symplectic space", "different σ"));
    }
    Ok(())
}

/// `A = (S + conj S)/2 + S # conj S`, a real symmetric form.
pub fn ab_form(s: &CcrCovariance) -> Result<HermitianMatrix> {
    let mean = geometric_mean(s.s(), &s.s().conj(), DEFAULT_SUPPORT_TOL)?;
    let a = to_complex(s.r()) + mean.mean.as_matrix();
    HermitianMatrix::from_real(&a.map(|z| z.re))
}

/// Determinant evaluation of the transition probability.
#[derive(Debug, Clone, Serialize)]
pub struct CcrTransition {
    pub t: f64,
    /// `det(2 ratio(A # B, A + B))` on `support(A + B)`.
    pub det: f64,
    pub support_rank: usize,
    /// Smallest eigenvalue of `ratio(A, A + B)` or `ratio(B, A + B)`.
    pub min_ratio: f64,
    /// A unit vector null for one of `A`, `B` but not the other.
    pub central_witness: Option<Vec<f64>>,
}

fn real_witness(v: &CMatrix) -> Vec<f64> {
    let col = v.column(0);
    let pivot = col.iter().copied().fold(c(0.0, 0.0), |m, z| if z.norm() > m.norm() { z } else { m });
    let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { c(1.0, 0.0) };
    let re: Vec<f64> = col.iter().map(|z| (z * phase).re).collect();
    let norm = re.iter().map(|x| x * x).sum::<f64>().sqrt();
    re.into_iter().map(|x| if norm > 0.0 { x / norm } else { x }).collect()
}

fn find_central(own: &EigH, other: &HermitianMatrix, w: &CMatrix) -> Option<Vec<f64>> {
    for j in 0..own.dim() {
        if own.values[j] >= CENTRAL_RATIO_TOL {
            break;
        }
        let u = own.vectors.columns(j, 1).into_owned();
        if other.form(&u.column(0).into_owned()) > CENTRAL_FORM_TOL {
            return Some(real_witness(&(w * u)));
        }
    }
    None
}

pub fn ccr_transition(s: &CcrCovariance, t: &CcrCovariance) -> Result<CcrTransition> {
    same_space(s, t)?;
    let a = ab_form(s)?;
    let b = ab_form(t)?;
    let g = &a + &b;
    let za = ratio_on_support(&a, &g, DEFAULT_SUPPORT_TOL)?;
    let w = za.inverse_sqrt_map();
    let zb = HermitianMatrix::symmetrized(w.adjoint() * b.as_matrix() * &w);
    let ea = za.ratio.eig()?;
    let eb = zb.eig()?;
    let central = find_central(&ea, &zb, &w).or_else(|| find_central(&eb, &za.ratio, &w));

    let mean = geometric_mean(&a, &b, DEFAULT_SUPPORT_TOL)?;
    let zm = HermitianMatrix::symmetrized(w.adjoint() * mean.mean.as_matrix() * &w);
    let det: f64 = zm.eig()?.values.iter().map(|v| 2.0 * v.max(0.0)).product();
    let min_ratio = ea.values.first().copied().unwrap_or(1.0).min(eb.values.first().copied().unwrap_or(1.0));
    let value = if central.is_some() { 0.0 } else { det.sqrt().clamp(0.0, 1.0) };
    Ok(CcrTransition {
        t: value,
        det,
        support_rank: za.basis.ncols(),
        min_ratio,
        central_witness: central,
    })
}

/// Transition probability `(φ_S^{1/2} | φ_T^{1/2})`.
pub fn trans_prob_ccr(s: &CcrCovariance, t: &CcrCovariance) -> Result<f64> {
    Ok(ccr_transition(s, t)?.t)
}

/// Comparison of the two metrics `S + conj S`, `T + conj T` and of the
/// square-rooted ratio operators.
#[derive(Debug, Clone, Serialize)]
pub struct QeDistance {
    pub equivalent_metrics: bool,
    /// Hilbert-Schmidt distance, present only for equivalent metrics.
    pub hs_distance: Option<f64>,
    /// `max(λ_max, 1/λ_min)` of one metric relative to the other on the
    /// common support; infinite when the supports differ.
    pub condition: f64,
}

fn pd_power(h: &HermitianMatrix, p: f64) -> Result<HermitianMatrix> {
    Ok(h.eig()?.map(|v| v.powf(p)))
}

pub fn qe_distance_ccr(s: &CcrCovariance, t: &CcrCovariance) -> Result<QeDistance> {
    same_space(s, t)?;
    let gs = s.metric();
    let gt = t.metric();
    let es = gs.eig()?;
    let et = gt.eig()?;
    let scale = es.spectral_norm().max(et.spectral_norm());
    let thr = DEFAULT_SUPPORT_TOL * scale;
    let ks = es.columns_where(|v| v > thr);
    let kt = et.columns_where(|v| v > thr);
    let ps = &ks * ks.adjoint();
    let pt = &kt * kt.adjoint();
    if ks.ncols() != kt.ncols() || (ps - pt).norm() > SUPPORT_MATCH_TOL {
        return Ok(QeDistance { equivalent_metrics: false, hs_distance: None, condition: f64::INFINITY });
    }
    let k = ks;
    if k.ncols() == 0 {
        return Ok(QeDistance { equivalent_metrics: true, hs_distance: Some(0.0), condition: 1.0 });
    }
    let gs_k = gs.compress(&k);
    let gt_k = gt.compress(&k);
    let rel = ratio(&gs_k, &gt_k)?.eig()?;
    let lo = rel.values.first().copied().unwrap_or(1.0);
    let hi = rel.values.last().copied().unwrap_or(1.0);
    let condition = if lo > 0.0 { hi.max(1.0 / lo) } else { f64::INFINITY };
    if condition > METRIC_CONDITION_CAP {
        return Ok(QeDistance { equivalent_metrics: false, hs_distance: None, condition });
    }

    // operator G^{-1/2} √(G^{-1/2} X G^{-1/2}) G^{1/2} on the common support
    let rooted = |x: &CcrCovariance, g: &HermitianMatrix| -> Result<CMatrix> {
        let xk = x.s().compress(&k);
        let half = pd_power(g, 0.5)?;
        let inv_half = pd_power(g, -0.5)?;
        let z = xk.congruence(inv_half.as_matrix());
        let root = sqrt_psd(&z, DEFAULT_CLAMP_TOL)?;
        Ok(inv_half.as_matrix() * root.as_matrix() * half.as_matrix())
    };
    let diff = rooted(s, &gs_k)? - rooted(t, &gt_k)?;
    let m = (&gs_k + &gt_k).scale(0.5);
    let dist = (pd_power(&m, 0.5)?.as_matrix() * diff * pd_power(&m, -0.5)?.as_matrix()).norm();
    Ok(QeDistance { equivalent_metrics: true, hs_distance: Some(dist), condition })
}

/// `‖√ratio(X, X+Y) − √ratio(Y, X+Y)‖_HS` for `X = (√S + √conj S)²` and
/// `Y` built likewise from `T`.
pub fn condition3_distance(s: &CcrCovariance, t: &CcrCovariance) -> Result<f64> {
    same_space(s, t)?;
    let squared_sum = |x: &CcrCovariance| -> Result<HermitianMatrix> {
        let a = sqrt_psd(x.s(), DEFAULT_CLAMP_TOL)?;
        let b = sqrt_psd(&x.s().conj(), DEFAULT_CLAMP_TOL)?;
        let sum = a.as_matrix() + b.as_matrix();
        Ok(HermitianMatrix::symmetrized(&sum * &sum))
    };
    let x = squared_sum(s)?;
    let y = squared_sum(t)?;
    let g = &x + &y;
    let rx = sqrt_psd(&ratio(&x, &g)?, DEFAULT_CLAMP_TOL)?;
    let ry = sqrt_psd(&ratio(&y, &g)?, DEFAULT_CLAMP_TOL)?;
    Ok((rx.as_matrix() - ry.as_matrix()).norm())
}

#[derive(Debug, Clone, Serialize)]
pub struct CcrVerdict {
    pub kind: VerdictKind,
    pub reason: Reason,
    pub t: f64,
    pub transition: CcrTransition,
    pub qe: QeDistance,
}

/// Quasi-equivalent when `t > tol`, disjoint otherwise.
pub fn classify_ccr(s: &CcrCovariance, t: &CcrCovariance, tol: f64) -> Result<CcrVerdict> {
    let transition = ccr_transition(s, t)?;
    let qe = qe_distance_ccr(s, t)?;
    let (kind, reason) = if transition.t > tol {
        (VerdictKind::QuasiEquivalent, Reason::PositiveTransitionProbability)
    } else if transition.central_witness.is_some() {
        (VerdictKind::Disjoint, Reason::CentralElementMismatch)
    } else {
        (VerdictKind::Disjoint, Reason::SupportMismatch)
    };
    Ok(CcrVerdict { kind, reason, t: transition.t, transition, qe })
}

/// True when `ratio(S, S + conj S)` has trivial kernel on the support of
/// the metric.
pub fn is_standard_ccr(s: &CcrCovariance) -> Result<bool> {
    let z = ratio_on_support(s.s(), &s.metric(), DEFAULT_SUPPORT_TOL)?;
    Ok(z.ratio.dim() == 0 || z.ratio.min_eigenvalue()? > 1e-10)
}
