//! Covariance operators of quasi-free states on a CAR algebra.
//!
//! `V = R^d` sits inside `C^d` as the real-coordinate vectors and complex
//! conjugation acts entrywise. A covariance operator `S` satisfies
//! `0 <= S <= I` and `S + conj(S) = I`; the generators obey
//! `xy + yx = (x, y) 1`, so `φ_S(x y) = x^T S y` for `x, y ∈ C^d`.

use nalgebra::SVD;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matcore::{
    c, conj_matrix, hs_norm, noise_floor, pfaffian, projection_meet, sqrt_psd, CMatrix,
    CVector, HermitianMatrix, ProjectionMatrix, SkewMatrix, DEFAULT_CLAMP_TOL, DEFAULT_MEET_TOL,
};

/// Absolute tolerance for the covariance relations.
pub const CAR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct CarCovariance {
    s: HermitianMatrix,
}

/// Checks hermiticity, `S + conj(S) = I` and `S >= 0` (in that order).
pub fn validate_car(raw: &CMatrix) -> Result<CarCovariance> {
    let s = HermitianMatrix::new(raw.clone())?;
    let d = s.dim();
    let relation = s.as_matrix() + conj_matrix(s.as_matrix()) - CMatrix::identity(d, d);
    let violation = relation.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if violation > CAR_TOL {
        return Err(Error::CarRelation {
            max_violation: violation,
        });
    }
    let lowest = s.min_eigenvalue()?;
    if lowest < -CAR_TOL {
        return Err(Error::NotPsd { eigenvalue: lowest });
    }
    Ok(CarCovariance { s })
}

impl CarCovariance {
    pub fn new(raw: CMatrix) -> Result<Self> {
        validate_car(&raw)
    }

    /// `I/2`, the tracial state.
    pub fn tracial(dim: usize) -> Self {
        CarCovariance {
            s: HermitianMatrix::identity(dim).scale(0.5),
        }
    }

    /// The one-mode covariance `[[1/2, -iμ], [iμ, 1/2]]`, eigenvalues `1/2 ± μ`.
    pub fn mu_block(mu: f64) -> Result<Self> {
        validate_car(&CMatrix::from_row_slice(
            2,
            2,
            &[c(0.5, 0.0), c(0.0, -mu), c(0.0, mu), c(0.5, 0.0)],
        ))
    }

    pub fn dim(&self) -> usize {
        self.s.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.s
    }

    /// `I - S`, which equals `conj(S)`.
    pub fn complement(&self) -> Self {
        CarCovariance {
            s: &HermitianMatrix::identity(self.dim()) - &self.s,
        }
    }

    pub fn direct_sum(&self, other: &CarCovariance) -> Self {
        let (a, b) = (self.dim(), other.dim());
        let mut m = CMatrix::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(self.s.as_matrix());
        m.view_mut((a, a), (b, b)).copy_from(other.s.as_matrix());
        CarCovariance {
            s: HermitianMatrix::symmetrized(m),
        }
    }

    /// `O S O^T` for a real orthogonal `O`, again a covariance operator.
    pub fn rotated(&self, orthogonal: &nalgebra::DMatrix<f64>) -> Result<Self> {
        let o = orthogonal.map(|x| c(x, 0.0));
        validate_car(&(&o * self.s.as_matrix() * o.transpose()))
    }

    /// Fock states have projection covariances.
    pub fn is_projection(&self) -> bool {
        ProjectionMatrix::new(self.s.clone()).is_ok()
    }
}

/// Two covariance operators on the same space.
#[derive(Debug, Clone, PartialEq)]
pub struct CarStatePair {
    pub s: CarCovariance,
    pub t: CarCovariance,
}

impl CarStatePair {
    pub fn new(s: CarCovariance, t: CarCovariance) -> Result<Self> {
        if s.dim() != t.dim() {
            return Err(Error::shape(format!("dim {}", s.dim()), format!("dim {}", t.dim())));
        }
        Ok(CarStatePair { s, t })
    }

    pub fn swapped(&self) -> Self {
        CarStatePair {
            s: self.t.clone(),
            t: self.s.clone(),
        }
    }
}

/// Two-point function `φ_S(x y) = x^T S y`.
pub fn two_point(s: &CarCovariance, x: &CVector, y: &CVector) -> Complex64 {
    (x.transpose() * s.s.as_matrix() * y)[(0, 0)]
}

/// `φ_S(x_1 x_2 ... x_n)`: zero for odd `n`, otherwise the Pfaffian of the
/// skew matrix with entries `φ_S(x_j x_k)` above the diagonal.
pub fn wick_moment(s: &CarCovariance, xs: &[CVector]) -> Result<Complex64> {
    if let Some(bad) = xs.iter().find(|x| x.len() != s.dim()) {
        return Err(Error::shape(format!("vectors of length {}", s.dim()), format!("length {}", bad.len())));
    }
    if xs.len() % 2 == 1 {
        return Ok(c(0.0, 0.0));
    }
    let a = SkewMatrix::from_upper(xs.len(), |j, k| two_point(s, &xs[j], &xs[k]));
    pfaffian(&a)
}

/// Intermediate values of the determinant formula.
#[derive(Debug, Clone)]
pub struct CarTransition {
    /// `det(M M*)^{1/4}`, clamped to `[0, 1]`.
    pub t: f64,
    /// `det(M M*) = |det M|^2`.
    pub det_mm: f64,
    /// Singular values of `M`, descending; those at the rounding level are
    /// reported as exact zeros.
    pub singular_values: Vec<f64>,
}

/// `M = √S √T + √(I-S) √(I-T)`.
pub fn transition_operator(pair: &CarStatePair) -> Result<CMatrix> {
    let root = |h: &HermitianMatrix| sqrt_psd(h, DEFAULT_CLAMP_TOL);
    let s = root(pair.s.matrix())?;
    let t = root(pair.t.matrix())?;
    let s_c = root(pair.s.complement().matrix())?;
    let t_c = root(pair.t.complement().matrix())?;
    Ok(s.as_matrix() * t.as_matrix() + s_c.as_matrix() * t_c.as_matrix())
}

pub fn car_transition(pair: &CarStatePair) -> Result<CarTransition> {
    let m = transition_operator(pair)?;
    let d = m.nrows();
    if d == 0 {
        return Ok(CarTransition {
            t: 1.0,
            det_mm: 1.0,
            singular_values: Vec::new(),
        });
    }
    let svd = SVD::try_new(m, false, false, f64::EPSILON, 1000 * d).ok_or(Error::NoConvergence { dim: d })?;
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let floor = noise_floor(d, sv[0].max(1.0));
    for v in sv.iter_mut() {
        if *v <= floor {
            *v = 0.0;
        }
    }
    let det_m: f64 = sv.iter().product();
    let t: f64 = sv.iter().map(|v| v.sqrt()).product();
    Ok(CarTransition {
        t: t.clamp(0.0, 1.0),
        det_mm: det_m * det_m,
        singular_values: sv,
    })
}

/// Transition probability `(φ_S^{1/2} | φ_T^{1/2}) = det(M M*)^{1/4}`.
pub fn trans_prob_car(pair: &CarStatePair) -> Result<f64> {
    Ok(car_transition(pair)?.t)
}

/// `||√S - √T||_HS`.
pub fn qe_distance_car(pair: &CarStatePair) -> Result<f64> {
    let s = sqrt_psd(pair.s.matrix(), DEFAULT_CLAMP_TOL)?;
    let t = sqrt_psd(pair.t.matrix(), DEFAULT_CLAMP_TOL)?;
    Ok(hs_norm(&(s.as_matrix() - t.as_matrix())))
}

/// The quadrature projection `[[S, √(S(I-S))], [√(S(I-S)), I-S]]` on
/// `C^d ⊕ C^d`.
#[derive(Debug, Clone)]
pub struct Quadrature {
    projection: ProjectionMatrix,
}

impl Quadrature {
    pub fn projection(&self) -> &ProjectionMatrix {
        &self.projection
    }

    /// The quadrature as a covariance operator of the real space `V ⊕ iV`.
    ///
    /// In the coordinates `ξ ⊕ η ↦ ξ ⊕ iη`, where the doubled conjugation
    /// becomes entrywise, the off-diagonal blocks pick up `±i`.
    pub fn as_covariance(&self) -> Result<CarCovariance> {
        let p = self.projection.as_matrix();
        let d = p.nrows() / 2;
        let mut m = p.clone();
        for j in 0..d {
            for k in 0..d {
                m[(j, d + k)] = p[(j, d + k)] * c(0.0, 1.0);
                m[(d + j, k)] = p[(d + j, k)] * c(0.0, -1.0);
            }
        }
        validate_car(&m)
    }
}

pub fn quadrature(s: &CarCovariance) -> Result<Quadrature> {
    let d = s.dim();
    let off = s.matrix().eig()?.map(|v| {
        let v = v.clamp(0.0, 1.0);
        (v * (1.0 - v)).sqrt()
    });
    let mut p = CMatrix::zeros(2 * d, 2 * d);
    p.view_mut((0, 0), (d, d)).copy_from(s.matrix().as_matrix());
    p.view_mut((0, d), (d, d)).copy_from(off.as_matrix());
    p.view_mut((d, 0), (d, d)).copy_from(off.as_matrix());
    p.view_mut((d, d), (d, d)).copy_from(s.complement().matrix().as_matrix());
    Ok(Quadrature {
        projection: ProjectionMatrix::new(HermitianMatrix::symmetrized(p))?,
    })
}

/// `(t(P, Q), t(S, T)^2)` for the quadratures `P`, `Q` of `S`, `T`.
pub fn quadrature_identity_check(pair: &CarStatePair) -> Result<(f64, f64)> {
    let p = quadrature(&pair.s)?.as_covariance()?;
    let q = quadrature(&pair.t)?.as_covariance()?;
    let lhs = trans_prob_car(&CarStatePair::new(p, q)?)?;
    let t = trans_prob_car(pair)?;
    Ok((lhs, t * t))
}

/// Rank of `P ∧ (I - Q)` for the quadratures `P`, `Q`.
pub fn meet_criterion(pair: &CarStatePair) -> Result<usize> {
    let p = quadrature(&pair.s)?;
    let q = quadrature(&pair.t)?;
    let meet = projection_meet(p.projection(), &q.projection().complement(), DEFAULT_MEET_TOL)?;
    Ok(meet.rank())
}

/// `H` with `S = (1 + e^H)^{-1}`, i.e. `H = log((I - S) S^{-1})`.
pub fn hamiltonian_of(s: &CarCovariance) -> Result<HermitianMatrix> {
    let eig = s.matrix().eig()?;
    if let Some(&bad) = eig.values.iter().find(|&&v| v <= CAR_TOL || v >= 1.0 - CAR_TOL) {
        return Err(Error::DegenerateCovariance { eigenvalue: bad });
    }
    Ok(eig.map(|v| ((1.0 - v) / v).ln()))
}

/// `S` is standard iff `ker S = {0}`.
pub fn is_standard_car(s: &CarCovariance, tol: f64) -> Result<bool> {
    Ok(s.matrix().min_eigenvalue()? > tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(mu: f64, nu: f64) -> CarStatePair {
        CarStatePair::new(CarCovariance::mu_block(mu).unwrap(), CarCovariance::mu_block(nu).unwrap()).unwrap()
    }

    fn real_unit(d: usize, j: usize) -> CVector {
        CVector::from_fn(d, |i, _| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    #[test]
    fn validation_examples() {
        assert!(validate_car(&CMatrix::identity(3, 3).scale(0.5)).is_ok());
        let fock = CarCovariance::mu_block(0.5).unwrap();
        let e = fock.matrix().eig().unwrap();
        assert!(e.values[0].abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
        assert!(fock.is_projection());
        match validate_car(&CMatrix::identity(2, 2)) {
            Err(Error::CarRelation { max_violation }) => assert!((max_violation - 1.0).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validation_rejects_non_hermitian_and_non_psd() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.), c(0., -0.1), c(0., 0.3), c(0.5, 0.)]);
        assert!(matches!(validate_car(&m), Err(Error::NotHermitian { .. })));
        assert!(matches!(CarCovariance::mu_block(0.7), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn wick_two_point_of_tracial_state() {
        let s = CarCovariance::tracial(3);
        let x = real_unit(3, 1);
        assert!((wick_moment(&s, &[x.clone(), x]).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn wick_four_point_recursion() {
        let s = CarCovariance::mu_block(0.3).unwrap().direct_sum(&CarCovariance::mu_block(-0.2).unwrap());
        let xs: Vec<CVector> = (0..4)
            .map(|k| CVector::from_fn(4, |i, _| c((i + 2 * k) as f64 * 0.3 - 0.5, (i * k) as f64 * 0.1)))
            .collect();
        let p = |a: usize, b: usize| two_point(&s, &xs[a], &xs[b]);
        let want = p(0, 1) * p(2, 3) - p(0, 2) * p(1, 3) + p(0, 3) * p(1, 2);
        assert!((wick_moment(&s, &xs).unwrap() - want).norm() < 1e-14);
    }

    #[test]
    fn wick_odd_is_zero() {
        let s = CarCovariance::mu_block(0.3).unwrap();
        let x = real_unit(2, 0);
        assert_eq!(wick_moment(&s, &[x.clone(), x.clone(), x]).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn transition_examples() {
        assert!((trans_prob_car(&pair(0.3, 0.3)).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(trans_prob_car(&pair(0.5, -0.5)).unwrap(), 0.0);
        let want = (0.8f64 * 0.6).sqrt() + (0.2f64 * 0.4).sqrt();
        assert!((trans_prob_car(&pair(0.3, 0.1)).unwrap() - want).abs() < 1e-14);
        assert!((want - 0.97566).abs() < 1e-5);
    }

    #[test]
    fn qe_distance_examples() {
        assert!(qe_distance_car(&pair(0.2, 0.2)).unwrap() < 1e-14);
        assert!((qe_distance_car(&pair(0.5, -0.5)).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        let a = pair(0.3, 0.1);
        let b = pair(-0.4, 0.25);
        let sum = CarStatePair::new(a.s.direct_sum(&b.s), a.t.direct_sum(&b.t)).unwrap();
        let lhs = qe_distance_car(&sum).unwrap().powi(2);
        let rhs = qe_distance_car(&a).unwrap().powi(2) + qe_distance_car(&b).unwrap().powi(2);
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn quadrature_examples() {
        let p = quadrature(&CarCovariance::tracial(2)).unwrap();
        let half = CMatrix::from_element(4, 4, c(0.0, 0.0));
        let mut want = half;
        for j in 0..2 {
            for (a, b) in [(0, 0), (0, 2), (2, 0), (2, 2)] {
                want[(j + a, j + b)] = c(0.5, 0.0);
            }
        }
        assert!(hs_norm(&(p.projection().as_matrix() - want)) < 1e-15);

        let fock = CarCovariance::mu_block(0.5).unwrap();
        let q = quadrature(&fock).unwrap();
        let m = q.projection().as_matrix();
        assert!(hs_norm(&m.view((0, 2), (2, 2)).into_owned()) < 1e-15);
        assert_eq!(q.projection().rank(), 2);
        assert!(q.as_covariance().is_ok());
    }

    #[test]
    fn quadrature_identity_examples() {
        let (l, r) = quadrature_identity_check(&pair(0.3, 0.3)).unwrap();
        assert!((l - 1.0).abs() < 1e-12 && (r - 1.0).abs() < 1e-12);
        let (l, r) = quadrature_identity_check(&pair(0.5, 0.0)).unwrap();
        assert!((l - 0.5).abs() < 1e-12 && (r - 0.5).abs() < 1e-12);
    }

    #[test]
    fn meet_examples() {
        assert_eq!(meet_criterion(&pair(0.2, 0.2)).unwrap(), 0);
        assert!(meet_criterion(&pair(0.5, -0.5)).unwrap() >= 1);
        assert_eq!(meet_criterion(&pair(0.3, 0.1)).unwrap(), 0);
    }

    #[test]
    fn hamiltonian_examples() {
        let h = hamiltonian_of(&CarCovariance::tracial(4)).unwrap();
        assert!(hs_norm(h.as_matrix()) < 1e-15);

        let s = CarCovariance::mu_block(0.3).unwrap();
        let h = hamiltonian_of(&s).unwrap();
        let e = h.eig().unwrap();
        let l = (0.25f64).ln();
        assert!((e.values[0] - l).abs() < 1e-12 && (e.values[1] + l).abs() < 1e-12);
        assert!(hs_norm(&(conj_matrix(h.as_matrix()) + h.as_matrix())) < 1e-12);
        let back = h.eig().unwrap().map(|v| 1.0 / (1.0 + v.exp()));
        assert!(hs_norm(&(back.as_matrix() - s.matrix().as_matrix())) < 1e-12);

        assert!(matches!(
            hamiltonian_of(&CarCovariance::mu_block(0.5).unwrap()),
            Err(Error::DegenerateCovariance { .. })
        ));
    }

    #[test]
    fn standardness_examples() {
        assert!(is_standard_car(&CarCovariance::tracial(3), 1e-10).unwrap());
        assert!(!is_standard_car(&CarCovariance::mu_block(0.5).unwrap(), 1e-10).unwrap());
        assert!(is_standard_car(&CarCovariance::mu_block(0.49).unwrap(), 1e-10).unwrap());
    }
}
