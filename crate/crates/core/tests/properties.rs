use nalgebra::DMatrix;
use proptest::prelude::*;

use quasifree::car::{
    qe_distance_car, trans_prob_car, two_point, wick_moment, CarCovariance, CarStatePair,
};
use quasifree::car_oracle::{density_from_covariance, jw_generators};
use quasifree::ccr::{
    ab_form, ccr_transition, classify_ccr, trans_prob_ccr, SymplecticSpace, CLASSIFY_TOL,
};
use quasifree::matcore::{
    geometric_mean, hs_norm, pfaffian, pfaffian_by_pairings, pfaffian_tridiagonal, sqrt_psd,
    DEFAULT_CLAMP_TOL, DEFAULT_SUPPORT_TOL,
};
use quasifree::sample::{
    gaussian_complex, kill_direction, random_car, random_car_pair, random_ccr,
    random_degenerate_space, random_pd, random_psd, random_skew, rng,
};
use quasifree::seqmodel::{partial_log_tp, partial_qe_sum, ModeFamily};
use quasifree::{CMatrix, CVector, Reason, SkewMatrix, VerdictKind};

fn c64(re: f64) -> num_complex::Complex64 {
    num_complex::Complex64::new(re, 0.0)
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn pfaffian_routes_agree(seed in any::<u64>(), half in 1usize..6) {
        let a = random_skew(&mut rng(seed), 2 * half);
        let x = pfaffian_by_pairings(&a).unwrap();
        let y = pfaffian_tridiagonal(&a).unwrap();
        prop_assert!((x - y).norm() <= 1e-10 * x.norm().max(1.0));
    }

    #[test]
    fn pfaffian_congruence(seed in any::<u64>(), half in 1usize..5) {
        let mut r = rng(seed);
        let d = 2 * half;
        let a = random_skew(&mut r, d);
        let b = gaussian_complex(&mut r, d, d);
        let bab = SkewMatrix::new(&b * a.as_matrix() * b.transpose()).unwrap();
        let lhs = pfaffian(&bab).unwrap();
        let rhs = b.clone().determinant() * pfaffian(&a).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-9 * rhs.norm().max(1.0));
    }

    #[test]
    fn sqrt_squares_back(seed in any::<u64>(), dim in 1usize..7, rank in 1usize..7) {
        let h = random_psd(&mut rng(seed), dim, rank.min(dim));
        let root = sqrt_psd(&h, DEFAULT_CLAMP_TOL).unwrap();
        let back = root.as_matrix() * root.as_matrix();
        let scale = h.spectral_norm().unwrap();
        prop_assert!(hs_norm(&(back - h.as_matrix())) <= 1e-8 * scale);
        prop_assert!(root.min_eigenvalue().unwrap() >= -1e-12 * scale.sqrt());
    }

    #[test]
    fn geometric_mean_is_symmetric(seed in any::<u64>(), dim in 1usize..6) {
        let mut r = rng(seed);
        let a = random_pd(&mut r, dim, 0.05);
        let b = random_pd(&mut r, dim, 0.05);
        let ab = geometric_mean(&a, &b, DEFAULT_SUPPORT_TOL).unwrap().mean;
        let ba = geometric_mean(&b, &a, DEFAULT_SUPPORT_TOL).unwrap().mean;
        prop_assert!(hs_norm(&(ab.as_matrix() - ba.as_matrix())) <= 1e-8 * hs_norm(ab.as_matrix()).max(1.0));
    }

    #[test]
    fn geometric_mean_solves_riccati(seed in any::<u64>(), dim in 1usize..6) {
        // X = A # B is the PD solution of X A^{-1} X = B
        let mut r = rng(seed);
        let a = random_pd(&mut r, dim, 0.1);
        let b = random_pd(&mut r, dim, 0.1);
        let x = geometric_mean(&a, &b, DEFAULT_SUPPORT_TOL).unwrap().mean;
        let a_inv = a.as_matrix().clone().try_inverse().unwrap();
        let lhs = x.as_matrix() * a_inv * x.as_matrix();
        prop_assert!(hs_norm(&(lhs - b.as_matrix())) <= 1e-8 * hs_norm(b.as_matrix()));
    }

    #[test]
    fn singular_geometric_mean_is_bounded_by_arithmetic(seed in any::<u64>(), dim in 2usize..6) {
        let mut r = rng(seed);
        let a = random_psd(&mut r, dim, dim - 1);
        let b = random_psd(&mut r, dim, dim - 1);
        let g = geometric_mean(&a, &b, DEFAULT_SUPPORT_TOL).unwrap();
        let gap = &(&a + &b).scale(0.5) - &g.mean;
        let scale = (&a + &b).spectral_norm().unwrap();
        prop_assert!(gap.min_eigenvalue().unwrap() >= -1e-9 * scale);
        prop_assert!(g.mean.min_eigenvalue().unwrap() >= -1e-9 * scale);
    }

    #[test]
    fn car_transition_basics(seed in any::<u64>(), modes in 1usize..5) {
        let pair = random_car_pair(&mut rng(seed), modes);
        let t = trans_prob_car(&pair).unwrap();
        let back = trans_prob_car(&pair.swapped()).unwrap();
        prop_assert!((0.0..=1.0).contains(&t));
        prop_assert!((t - back).abs() <= 1e-12);
        let same = CarStatePair::new(pair.s.clone(), pair.s.clone()).unwrap();
        prop_assert!((trans_prob_car(&same).unwrap() - 1.0).abs() <= 1e-12);
        prop_assert!(qe_distance_car(&same).unwrap() <= 1e-12);
        let conj = CarStatePair::new(pair.s.complement(), pair.t.complement()).unwrap();
        prop_assert!((trans_prob_car(&conj).unwrap() - t).abs() <= 1e-12);
    }

    #[test]
    fn car_transition_multiplies_over_direct_sums(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_car_pair(&mut r, 2);
        let q = random_car_pair(&mut r, 1);
        let joint = CarStatePair::new(p.s.direct_sum(&q.s), p.t.direct_sum(&q.t)).unwrap();
        let lhs = trans_prob_car(&joint).unwrap();
        let rhs = trans_prob_car(&p).unwrap() * trans_prob_car(&q).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn wick_two_vectors_is_two_point(seed in any::<u64>(), modes in 1usize..4) {
        let mut r = rng(seed);
        let s = random_car(&mut r, modes);
        let x = gaussian_complex(&mut r, 2 * modes, 1).column(0).into_owned();
        let y = gaussian_complex(&mut r, 2 * modes, 1).column(0).into_owned();
        let w = wick_moment(&s, &[x.clone(), y.clone()]).unwrap();
        prop_assert!((w - two_point(&s, &x, &y)).norm() <= 1e-12 * (x.norm() * y.norm()).max(1.0));
    }

    #[test]
    fn ccr_transition_basics(seed in any::<u64>(), modes in 1usize..3, slack in 0.0f64..0.5) {
        let mut r = rng(seed);
        let space = SymplecticSpace::standard(modes);
        let s = random_ccr(&mut r, &space, slack).unwrap();
        let t = random_ccr(&mut r, &space, slack).unwrap();
        let st = trans_prob_ccr(&s, &t).unwrap();
        let ts = trans_prob_ccr(&t, &s).unwrap();
        prop_assert!((0.0..=1.0).contains(&st));
        prop_assert!((st - ts).abs() <= 1e-9);
        prop_assert!((trans_prob_ccr(&s, &s).unwrap() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn ab_form_is_real_and_sandwiched(seed in any::<u64>(), dim in 2usize..6, pairs in 0usize..3) {
        let mut r = rng(seed);
        let (space, _) = random_degenerate_space(&mut r, dim, pairs.min(dim / 2));
        let s = random_ccr(&mut r, &space, 0.0).unwrap();
        let a = ab_form(&s).unwrap();
        prop_assert!(a.as_matrix().iter().all(|z| z.im == 0.0));
        let metric = s.metric();
        prop_assert!((&a.scale(2.0) - &metric).min_eigenvalue().unwrap() >= -1e-8);
        prop_assert!((&metric.scale(2.0) - &a.scale(2.0)).min_eigenvalue().unwrap() >= -1e-8);
    }

    #[test]
    fn degenerate_dichotomy(seed in any::<u64>(), dim in 3usize..6, kill in 0usize..3) {
        let mut r = rng(seed);
        let (space, ker) = random_degenerate_space(&mut r, dim, 1);
        let s = random_ccr(&mut r, &space, 0.2).unwrap();
        let mut t = random_ccr(&mut r, &space, 0.2).unwrap();
        // kill = 0: leave both generic; otherwise remove a central direction from T
        if kill > 0 {
            let h: Vec<f64> = ker.column(0).iter().copied().collect();
            t = kill_direction(&t, &h).unwrap();
        }
        let v = classify_ccr(&s, &t, CLASSIFY_TOL).unwrap();
        let central = v.transition.central_witness.is_some();
        prop_assert_eq!(v.kind == VerdictKind::Disjoint, central);
        prop_assert_eq!(central, kill > 0);
        if central {
            prop_assert_eq!(v.reason, Reason::CentralElementMismatch);
            let w = nalgebra::DVector::from_vec(v.transition.central_witness.clone().unwrap());
            // the witness lies in ker σ and T vanishes on it
            prop_assert!((space.sigma() * &w).amax() <= 1e-8);
            prop_assert!((w.transpose() * t.r() * &w)[(0, 0)].abs() <= 1e-8);
        } else {
            prop_assert!(v.t > 0.0);
        }
    }

    #[test]
    fn block_additivity(mu in -0.5f64..0.5, a in 0.0f64..0.5, p in 0.5f64..3.0, c in 1.0f64..4.0) {
        let first = ModeFamily::car_power(0.5, a, p).unwrap();
        let second = ModeFamily::car_literal(vec![(mu, -mu), (mu, mu)]).unwrap();
        let both = ModeFamily::concat(first.clone(), second.clone()).unwrap();
        let n = 40;
        let joint = partial_qe_sum(&both, n).unwrap();
        let parts = partial_qe_sum(&first, n).unwrap() + partial_qe_sum(&second, n).unwrap();
        prop_assert!((joint - parts).abs() <= 1e-10);

        let f = ModeFamily::ccr_thermal_power(c, 1.0, p).unwrap();
        let g = ModeFamily::ccr_literal(vec![(c, 1.0)]).unwrap();
        let fg = ModeFamily::concat(f.clone(), g.clone()).unwrap();
        let joint = partial_log_tp(&fg, n).unwrap();
        let parts = partial_log_tp(&f, n).unwrap() + partial_log_tp(&g, n).unwrap();
        prop_assert!((joint - parts).abs() <= 1e-10 * parts.max(1.0));
    }
}

fn subsets(d: usize) -> impl Iterator<Item = Vec<usize>> {
    (0usize..1 << d).map(move |m| (0..d).filter(|j| m >> j & 1 == 1).collect())
}

#[test]
fn oracle_density_matches_all_moments() {
    let mut r = rng(11);
    for modes in 1..=3 {
        let s = random_car(&mut r, modes);
        let rho = density_from_covariance(&s).unwrap();
        let rep = jw_generators(modes).unwrap();
        for subset in subsets(2 * modes) {
            let got = rho.expectation(&rep.monomial(&subset));
            if subset.len() % 2 == 1 {
                assert!(got.norm() < 1e-12, "odd moment {subset:?}");
                continue;
            }
            // tr(ρ c_A) = 2^{|A|/2} φ_S(e_A) with e_j = c_j/√2
            let vectors: Vec<CVector> = subset
                .iter()
                .map(|&j| CVector::from_fn(2 * modes, |i, _| c64(if i == j { 1.0 } else { 0.0 })))
                .collect();
            let want = wick_moment(&s, &vectors).unwrap() * 2f64.powi(subset.len() as i32 / 2);
            assert!((got - want).norm() < 1e-10, "{subset:?}: {got} vs {want}");
        }
    }
}

#[test]
fn ccr_witness_is_real_vector_in_kernel() {
    let (space, ker) = random_degenerate_space(&mut rng(5), 4, 1);
    let s = random_ccr(&mut rng(6), &space, 0.1).unwrap();
    let h: Vec<f64> = ker.column(1).iter().copied().collect();
    let t = kill_direction(&s, &h).unwrap();
    let tr = ccr_transition(&s, &t).unwrap();
    assert_eq!(tr.t, 0.0);
    let w = DMatrix::from_row_slice(4, 1, &tr.central_witness.unwrap());
    assert!((space.sigma() * &w).amax() < 1e-8);
}

#[test]
fn non_hermitian_covariance_is_rejected() {
    let bad = CMatrix::from_element(2, 2, c64(1.0));
    assert!(CarCovariance::new(bad).is_err());
}
