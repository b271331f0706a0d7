//! Acceptance suite. Every check prints one `PASS`/`FAIL` line and the
//! process exits non-zero when any check fails.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use quasifree::car::{meet_criterion, quadrature, quadrature_identity_check, trans_prob_car, CarStatePair};
use quasifree::car_oracle::{density_from_covariance, fidelity_tr, overlap};
use quasifree::ccr::{ab_form, trans_prob_ccr, validate_ccr, CcrCovariance, SymplecticSpace};
use quasifree::ccr_oracle::{
    covariance_of_density, overlap_ccr, thermal_overlap_closed_form, thermal_scale, GaussianSpec,
    DEFAULT_OVERLAP_TOL,
};
use quasifree::matcore::{
    geometric_mean, hs_norm, pfaffian_by_pairings, pfaffian_tridiagonal, DEFAULT_SUPPORT_TOL,
};
use quasifree::sample::{
    random_car_pair, random_ccr, random_degenerate_space, random_invertible, random_pd, random_skew,
    rng, singular_car_pair,
};
use quasifree::seqmodel::{car_counterexample, classify_sequence, ModeFamily, DEFAULT_EPS};
use quasifree::{Result, VerdictKind};

/// `(overlap, fidelity)` of one oracle pair.
type OraclePair = (f64, f64);

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

impl Check {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        Check { name, pass, detail }
    }
}

fn car_oracle_equivalence(pairs_out: &mut Vec<OraclePair>) -> Result<Check> {
    let start = Instant::now();
    let mut rng = rng(0xCA7);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let pair = random_car_pair(&mut rng, 1 + i % 4);
        let formula = trans_prob_car(&pair)?;
        let rho = density_from_covariance(&pair.s)?;
        let tau = density_from_covariance(&pair.t)?;
        let ov = overlap(&rho, &tau)?;
        pairs_out.push((ov, fidelity_tr(&rho, &tau)?));
        worst = worst.max((formula - ov).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Check::new(
        "car formula vs Fock-space oracle",
        worst <= 1e-8 && secs < 120.0,
        format!("200 pairs, 1-4 modes, max |diff| = {worst:.2e} (tol 1e-8), {secs:.2} s (limit 120 s)"),
    ))
}

fn quadrature_identity() -> Result<Check> {
    let mut rng = rng(0x0AD);
    let (mut worst, mut worst_defect, mut invalid) = (0.0f64, 0.0f64, 0usize);
    for i in 0..100 {
        let pair = random_car_pair(&mut rng, 1 + i % 8);
        let (lhs, rhs) = quadrature_identity_check(&pair)?;
        worst = worst.max((lhs - rhs).abs());
        for s in [&pair.s, &pair.t] {
            let q = quadrature(s)?;
            worst_defect = worst_defect.max(q.projection().defect());
            if q.as_covariance().is_err() {
                invalid += 1;
            }
        }
    }
    Ok(Check::new(
        "quadrature identity t(P,Q) = t(S,T)^2",
        worst <= 1e-8 && worst_defect <= 1e-9 && invalid == 0,
        format!(
            "100 pairs, d <= 16, max |diff| = {worst:.2e} (tol 1e-8), max ||P^2-P|| = {worst_defect:.2e} (tol 1e-9), invalid quadratures = {invalid}"
        ),
    ))
}

fn meet_equivalence() -> Result<Check> {
    let mut rng = rng(0x3EE7);
    let mut pairs: Vec<CarStatePair> = (0..100).map(|i| random_car_pair(&mut rng, 1 + i % 4)).collect();
    pairs.extend((0..10).map(|i| singular_car_pair(&mut rng, 1 + i % 4)));
    let mut wrong = 0;
    let mut singular = 0;
    for pair in &pairs {
        let rank = meet_criterion(pair)?;
        let t = trans_prob_car(pair)?;
        if rank > 0 {
            singular += 1;
        }
        if (rank > 0) != (t < 1e-8) {
            wrong += 1;
        }
    }
    Ok(Check::new(
        "meet rank > 0 iff t < 1e-8",
        wrong == 0 && singular >= 10,
        format!("110 pairs (10 engineered), {singular} with nonzero meet, misclassified = {wrong}"),
    ))
}

/// Two oracle states and, for thermal pairs, their ratios.
type SpecPair = (GaussianSpec, GaussianSpec, Option<(f64, f64)>);

fn ccr_oracle_equivalence(pairs_out: &mut Vec<OraclePair>) -> Result<Check> {
    let qs = [0.0, 0.25, 1.0 / 3.0, 0.5, 2.0 / 3.0];
    let mut specs: Vec<SpecPair> = Vec::new();
    for (i, &q1) in qs.iter().enumerate() {
        for &q2 in &qs[i..] {
            specs.push((GaussianSpec::Thermal(vec![q1]), GaussianSpec::Thermal(vec![q2]), Some((q1, q2))));
        }
    }
    specs.push((GaussianSpec::SqueezedVacuum(0.4), GaussianSpec::Thermal(vec![0.25]), None));

    let (mut worst_oracle, mut worst_closed) = (0.0f64, 0.0f64);
    for (a, b, thermal) in &specs {
        let est = overlap_ccr(a, b, DEFAULT_OVERLAP_TOL)?;
        let sa = a.at_cutoff(est.cutoff)?;
        let sb = b.at_cutoff(est.cutoff)?;
        let formula = trans_prob_ccr(&covariance_of_density(&sa)?, &covariance_of_density(&sb)?)?;
        worst_oracle = worst_oracle.max((formula - est.value).abs());
        pairs_out.push((est.value, fidelity_tr(&sa.density, &sb.density)?));
        if let Some((q1, q2)) = thermal {
            let exact = trans_prob_ccr(
                &CcrCovariance::thermal_mode(thermal_scale(*q1))?,
                &CcrCovariance::thermal_mode(thermal_scale(*q2))?,
            )?;
            worst_closed = worst_closed.max((exact - thermal_overlap_closed_form(*q1, *q2)).abs());
        }
    }
    Ok(Check::new(
        "ccr formula vs truncated Fock oracle",
        worst_oracle <= 1e-6 && worst_closed <= 1e-8,
        format!(
            "{} pairs (15 thermal, 1 squeezed), max |formula - oracle| = {worst_oracle:.2e} (tol 1e-6), max |formula - thermal closed form| = {worst_closed:.2e} (tol 1e-8)",
            specs.len()
        ),
    ))
}

/// `∫ √(p q)` over `R^d` for centered Gaussians with diagonal variances,
/// by the trapezoid rule on a full tensor grid.
fn hellinger_integral(s: &[f64], t: &[f64]) -> f64 {
    let d = s.len();
    let n = 241usize;
    let half: Vec<f64> = s.iter().zip(t).map(|(a, b)| 12.0 * a.max(*b).sqrt()).collect();
    let step: Vec<f64> = half.iter().map(|h| 2.0 * h / (n - 1) as f64).collect();
    let density = |x: &[f64], var: &[f64]| -> f64 {
        let quad: f64 = x.iter().zip(var).map(|(xi, v)| xi * xi / v).sum();
        let norm: f64 = var.iter().map(|v| (2.0 * std::f64::consts::PI * v).sqrt()).product();
        (-0.5 * quad).exp() / norm
    };
    let mut total = 0.0;
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    loop {
        let mut w = 1.0;
        for j in 0..d {
            x[j] = -half[j] + idx[j] as f64 * step[j];
            w *= step[j] * if idx[j] == 0 || idx[j] == n - 1 { 0.5 } else { 1.0 };
        }
        total += w * (density(&x, s) * density(&x, t)).sqrt();
        let mut j = 0;
        while j < d {
            idx[j] += 1;
            if idx[j] < n {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == d {
            break;
        }
    }
    total
}

fn hellinger_reduction() -> Result<Check> {
    use rand::Rng;
    let mut rng = rng(0x4E11);
    let (mut worst_product, mut worst_integral) = (0.0f64, 0.0f64);
    let mut cases = 0;
    for d in 1..=3 {
        for _ in 0..6 {
            let s: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..5.0)).collect();
            let t: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..5.0)).collect();
            let space = SymplecticSpace::commutative(d);
            let diag = |v: &[f64]| DMatrix::from_diagonal(&DVector::from_row_slice(v));
            let formula = trans_prob_ccr(&validate_ccr(&space, &diag(&s))?, &validate_ccr(&space, &diag(&t))?)?;
            let product: f64 = s.iter().zip(&t).map(|(a, b)| 2.0 * (a * b).sqrt() / (a + b)).product();
            worst_product = worst_product.max((formula * formula - product).abs());
            worst_integral = worst_integral.max((formula - hellinger_integral(&s, &t)).abs());
            cases += 1;
        }
    }
    Ok(Check::new(
        "commutative case equals Hellinger affinity",
        worst_product <= 1e-10 && worst_integral <= 1e-6,
        format!(
            "{cases} diagonal cases, d <= 3, max |t^2 - prod| = {worst_product:.2e} (tol 1e-10), max |t - integral| = {worst_integral:.2e} (tol 1e-6)"
        ),
    ))
}

fn inequality_chain(car: &[OraclePair], ccr: &[OraclePair]) -> Check {
    let mut worst = f64::INFINITY;
    for &(ov, fid) in car.iter().chain(ccr) {
        let slack = (fid * fid - ov * ov).min(ov - fid * fid);
        worst = worst.min(slack);
    }
    Check::new(
        "overlap^2 <= fidelity^2 <= overlap",
        worst >= -1e-10 && !car.is_empty() && !ccr.is_empty(),
        format!("{} car + {} ccr oracle pairs, min slack = {worst:.2e} (tol -1e-10)", car.len(), ccr.len()),
    )
}

fn sequence_dichotomy() -> Result<Check> {
    let n_max = 4096;
    let expect = [
        ("car eps_k = 1/k^2", ModeFamily::car_power(0.5, 0.5, 2.0)?, VerdictKind::QuasiEquivalent),
        ("car eps_k = 1/k", ModeFamily::car_power(0.5, 0.5, 1.0)?, VerdictKind::Disjoint),
        ("ccr thermal 1/k^2", ModeFamily::ccr_thermal_power(1.0, 1.0, 2.0)?, VerdictKind::QuasiEquivalent),
        ("ccr thermal 1/sqrt(k)", ModeFamily::ccr_thermal_power(1.0, 1.0, 0.5)?, VerdictKind::Disjoint),
        ("car counterexample", car_counterexample(), VerdictKind::QuasiEquivalent),
    ];
    let mut failures = Vec::new();
    for (label, family, want) in &expect {
        let v = classify_sequence(family, n_max, DEFAULT_EPS)?;
        if v.kind != *want {
            failures.push(format!("{label}: {:?}", v.kind));
        }
        if *want == VerdictKind::QuasiEquivalent && *label != "car counterexample" && v.transition_product <= 0.0 {
            failures.push(format!("{label}: transition product {}", v.transition_product));
        }
        if *label == "car counterexample" {
            let meet_ok = v.meet_ranks.first().is_some_and(|&(k, r)| k == 1 && r >= 1);
            if v.transition_product != 0.0 || !meet_ok {
                failures.push(format!("{label}: product {} meets {:?}", v.transition_product, v.meet_ranks));
            }
        }
    }
    // every CCR family in the corpus must classify without a consistency error
    let ccr_corpus = [
        ModeFamily::ccr_thermal_power(1.0, 1.0, 2.0)?,
        ModeFamily::ccr_thermal_power(1.0, 1.0, 0.5)?,
        ModeFamily::ccr_thermal_power(2.0, 0.5, 1.0)?,
        ModeFamily::ccr_thermal_power(1.5, 3.0, 3.0)?,
        ModeFamily::ccr_literal(vec![(3.0, 1.0), (1.0, 1.0)])?,
        ModeFamily::ccr_literal(vec![(2.0, 1.5)])?,
        ModeFamily::concat(ModeFamily::ccr_thermal_power(1.0, 1.0, 2.0)?, ModeFamily::ccr_literal(vec![(2.0, 2.0)])?)?,
    ];
    let mut consistency = 0;
    for family in &ccr_corpus {
        if let Err(e) = classify_sequence(family, n_max, DEFAULT_EPS) {
            consistency += 1;
            failures.push(e.to_string());
        }
    }
    Ok(Check::new(
        "sequence dichotomy verdicts",
        failures.is_empty(),
        format!(
            "5 built-in families at N = {n_max}, {} ccr families checked for consistency ({consistency} violations){}",
            ccr_corpus.len(),
            if failures.is_empty() { String::new() } else { format!("; failures: {}", failures.join("; ")) }
        ),
    ))
}

fn primitive_properties() -> Result<Check> {
    let mut rng = rng(0x9F);
    let mut worst_pf = 0.0f64;
    for i in 0..500 {
        let dim = 2 * (1 + i % 5);
        let a = random_skew(&mut rng, dim);
        let det = a.as_matrix().clone().determinant();
        for pf in [pfaffian_tridiagonal(&a)?, pfaffian_by_pairings(&a)?] {
            worst_pf = worst_pf.max((pf * pf - det).norm() / det.norm());
        }
    }

    let mut worst_gm = 0.0f64;
    for i in 0..100 {
        let dim = 2 + i % 5;
        let a = random_pd(&mut rng, dim, 0.1);
        let b = random_pd(&mut rng, dim, 0.1);
        let c = random_invertible(&mut rng, dim);
        let lhs = geometric_mean(&a, &b, DEFAULT_SUPPORT_TOL)?.mean.congruence(&c);
        let rhs = geometric_mean(&a.congruence(&c), &b.congruence(&c), DEFAULT_SUPPORT_TOL)?.mean;
        let diff = hs_norm(&(lhs.as_matrix() - rhs.as_matrix())) / hs_norm(lhs.as_matrix()).max(1.0);
        worst_gm = worst_gm.max(diff);
    }

    let mut worst_sandwich = f64::INFINITY;
    for i in 0..100 {
        let space = match i % 4 {
            0 => SymplecticSpace::standard(1 + i % 3),
            1 => random_degenerate_space(&mut rng, 3 + i % 3, 1).0,
            2 => SymplecticSpace::commutative(2 + i % 3),
            _ => SymplecticSpace::standard(2),
        };
        let slack = if i % 5 == 0 { 0.0 } else { 0.3 };
        let s = random_ccr(&mut rng, &space, slack)?;
        let a = ab_form(&s)?;
        let metric = s.metric();
        let two_a = a.scale(2.0);
        let lower = (&two_a - &metric).min_eigenvalue()?;
        let upper = (&metric.scale(2.0) - &two_a).min_eigenvalue()?;
        worst_sandwich = worst_sandwich.min(lower.min(upper));
    }

    Ok(Check::new(
        "primitive properties",
        worst_pf <= 1e-8 && worst_gm <= 1e-7 && worst_sandwich >= -1e-8,
        format!(
            "pf^2 = det on 500 skew matrices (both routes): max rel err {worst_pf:.2e} (tol 1e-8); mean congruence on 100 triples: max err {worst_gm:.2e} (tol 1e-7); sandwich on 100 covariances: min slack {worst_sandwich:.2e} (tol -1e-8)"
        ),
    ))
}

fn report(checks: &mut Vec<Check>, name: &'static str, result: Result<Check>) {
    checks.push(result.unwrap_or_else(|e| Check::new(name, false, format!("error: {e}"))));
}

fn main() -> ExitCode {
    let mut checks = Vec::new();
    let mut car_pairs = Vec::new();
    let mut ccr_pairs = Vec::new();
    report(&mut checks, "car formula vs Fock-space oracle", car_oracle_equivalence(&mut car_pairs));
    report(&mut checks, "quadrature identity", quadrature_identity());
    report(&mut checks, "meet criterion", meet_equivalence());
    report(&mut checks, "ccr formula vs truncated Fock oracle", ccr_oracle_equivalence(&mut ccr_pairs));
    report(&mut checks, "commutative Hellinger reduction", hellinger_reduction());
    checks.push(inequality_chain(&car_pairs, &ccr_pairs));
    report(&mut checks, "sequence dichotomy verdicts", sequence_dichotomy());
    report(&mut checks, "primitive properties", primitive_properties());

    let mut failed = 0;
    for (i, c) in checks.iter().enumerate() {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("{tag} [{}] {}: {}", i + 1, c.name, c.detail);
        if !c.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
