use serde_json::{json, Value};

use quasifree::car::{
    car_transition, meet_criterion, qe_distance_car, quadrature, quadrature_identity_check,
    is_standard_car, CarCovariance, CarStatePair,
};
use quasifree::car_oracle::{density_from_covariance, fidelity_tr, overlap};
use quasifree::ccr::{classify_ccr, ccr_transition, is_standard_ccr, qe_distance_ccr, CcrCovariance, CcrVerdict};
use quasifree::ccr_oracle::{overlap_ccr_on, GaussianSpec};
use quasifree::matcore::projection_defect;
use quasifree::seqmodel::{car_counterexample, classify_sequence, SequenceVerdict, DEFAULT_EPS};
use quasifree::{Error, Result, VerdictKind};

use crate::report::{num, nums, Status};
use crate::scenario::{CcrInput, Kind, Resolved, Scenario};

/// Fermionic oracle limit for `oracle-compare`: `d ≤ 8`, i.e. four modes.
pub const MAX_CAR_ORACLE_DIM: usize = 8;
/// Agreement required of the bosonic oracle, whose truncation error sits
/// well above rounding.
pub const CCR_ORACLE_THRESHOLD: f64 = 1e-6;

pub struct Outcome {
    pub results: Value,
    pub status: Status,
}

impl Outcome {
    fn ok(results: Value) -> Self {
        Outcome { results, status: Status::Ok }
    }

    fn check(results: Value, passed: bool) -> Self {
        Outcome { results, status: if passed { Status::Ok } else { Status::CheckFailed } }
    }
}

fn wrong_kind(command: &str, kind: Kind) -> Error {
    Error::Shape { expected: format!("scenario kind accepted by {command}"), found: format!("{kind:?}") }
}

pub fn validate(sc: &Scenario, opts: &Resolved) -> Result<Outcome> {
    let results = match sc.kind {
        Kind::CarPair => {
            let pair = sc.car_pair(opts)?;
            let describe = |s: &CarCovariance| -> Result<Value> {
                Ok(json!({
                    "dim": s.dim(),
                    "pure": s.is_projection(),
                    "standard": is_standard_car(s, opts.tol)?,
                }))
            };
            json!({ "valid": true, "s": describe(&pair.s)?, "t": describe(&pair.t)? })
        }
        Kind::CcrPair => {
            let (s, t) = sc.ccr_input()?.covariances(opts.cutoff)?;
            let describe = |s: &CcrCovariance| -> Result<Value> {
                Ok(json!({ "dim": s.dim(), "standard": is_standard_ccr(s)? }))
            };
            json!({ "valid": true, "s": describe(&s)?, "t": describe(&t)? })
        }
        Kind::CarSequence | Kind::CcrSequence => {
            let family = sc.family()?;
            family.mode(1)?;
            json!({ "valid": true, "n_max": opts.n_max })
        }
    };
    Ok(Outcome::ok(results))
}

pub fn trans_prob(sc: &Scenario, opts: &Resolved) -> Result<Outcome> {
    match sc.kind {
        Kind::CarPair => {
            let pair = sc.car_pair(opts)?;
            let tr = car_transition(&pair)?;
            Ok(Outcome::ok(json!({
                "transition_probability": num(tr.t),
                "det_mm": num(tr.det_mm),
                "singular_values": nums(&tr.singular_values),
                "qe_distance": num(qe_distance_car(&pair)?),
            })))
        }
        Kind::CcrPair => {
            let (s, t) = sc.ccr_input()?.covariances(opts.cutoff)?;
            let tr = ccr_transition(&s, &t)?;
            let qe = qe_distance_ccr(&s, &t)?;
            Ok(Outcome::ok(json!({
                "transition_probability": num(tr.t),
                "det": num(tr.det),
                "support_rank": tr.support_rank,
                "min_ratio": num(tr.min_ratio),
                "central_witness": tr.central_witness.as_deref().map(nums),
                "qe_distance": qe.hs_distance.map_or(json!("infinity"), num),
                "equivalent_metrics": qe.equivalent_metrics,
            })))
        }
        kind => Err(wrong_kind("trans-prob", kind)),
    }
}

fn ccr_verdict_json(v: &CcrVerdict) -> Value {
    json!({
        "verdict": v.kind,
        "reason": v.reason,
        "transition_probability": num(v.t),
        "central_witness": v.transition.central_witness.as_deref().map(nums),
        "qe_distance": v.qe.hs_distance.map_or(json!("infinity"), num),
        "equivalent_metrics": v.qe.equivalent_metrics,
        "metric_condition": num(v.qe.condition),
    })
}

fn sequence_json(v: &SequenceVerdict) -> Value {
    json!({
        "verdict": v.kind,
        "reason": v.reason,
        "family_kind": v.family_kind,
        "n_used": v.n_used,
        "checkpoints": v.checkpoints,
        "qe_partial_sums": nums(&v.qe_partial_sums),
        "neg_log_t_partial_sums": nums(&v.neg_log_t_partial_sums),
        "qe_trend": v.qe_trend,
        "tp_trend": v.tp_trend,
        "transition_product": num(v.transition_product),
        "singular_modes": v.singular_modes,
        "meet_ranks": v.meet_ranks,
        "meet_rank": v.meet_ranks.iter().map(|&(_, r)| r).max().unwrap_or(0),
    })
}

fn sequence_outcome(v: &SequenceVerdict) -> Outcome {
    let status = if v.kind == VerdictKind::Inconclusive { Status::Inconclusive } else { Status::Ok };
    Outcome { results: sequence_json(v), status }
}

pub fn classify(sc: &Scenario, opts: &Resolved) -> Result<Outcome> {
    match sc.kind {
        Kind::CcrPair => {
            let (s, t) = sc.ccr_input()?.covariances(opts.cutoff)?;
            Ok(Outcome::ok(ccr_verdict_json(&classify_ccr(&s, &t, opts.tol)?)))
        }
        Kind::CarSequence | Kind::CcrSequence => {
            let v = classify_sequence(&sc.family()?, opts.n_max, DEFAULT_EPS)?;
            Ok(sequence_outcome(&v))
        }
        kind => Err(wrong_kind("classify", kind)),
    }
}

pub fn quadrature_check(sc: &Scenario, opts: &Resolved) -> Result<Outcome> {
    let pair = sc.car_pair(opts)?;
    let (lhs, rhs) = quadrature_identity_check(&pair)?;
    let p = quadrature(&pair.s)?;
    let q = quadrature(&pair.t)?;
    let defect_p = projection_defect(p.projection().as_hermitian());
    let defect_q = projection_defect(q.projection().as_hermitian());
    let doubled_valid = p.as_covariance().is_ok() && q.as_covariance().is_ok();
    let abs_diff = (lhs - rhs).abs();
    let passed = abs_diff <= opts.tol && defect_p.max(defect_q) <= opts.tol && doubled_valid;
    Ok(Outcome::check(
        json!({
            "quadrature_transition_probability": num(lhs),
            "transition_probability_squared": num(rhs),
            "abs_diff": num(abs_diff),
            "projection_defect_p": num(defect_p),
            "projection_defect_q": num(defect_q),
            "quadratures_valid": doubled_valid,
            "meet_rank": meet_criterion(&pair)?,
            "threshold": opts.tol,
            "passed": passed,
        }),
        passed,
    ))
}

pub fn oracle_compare(sc: &Scenario, opts: &Resolved) -> Result<Outcome> {
    match sc.kind {
        Kind::CarPair => car_oracle_compare(&sc.car_pair(opts)?, opts),
        Kind::CcrPair => match sc.ccr_input()? {
            CcrInput::States(s, t) => ccr_oracle_compare(&s, &t, opts),
            CcrInput::Matrices(..) => Err(Error::Shape {
                expected: "ccr-pair given as `states` for the Fock-space oracle".into(),
                found: "explicit covariance matrices".into(),
            }),
        },
        kind => Err(wrong_kind("oracle-compare", kind)),
    }
}

fn car_oracle_compare(pair: &CarStatePair, opts: &Resolved) -> Result<Outcome> {
    let d = pair.s.dim();
    if d > MAX_CAR_ORACLE_DIM {
        return Err(Error::SizeCap { what: "fermionic oracle dimension", value: d, cap: MAX_CAR_ORACLE_DIM });
    }
    let formula = car_transition(pair)?.t;
    let rho = density_from_covariance(&pair.s)?;
    let tau = density_from_covariance(&pair.t)?;
    let oracle = overlap(&rho, &tau)?;
    let fidelity = fidelity_tr(&rho, &tau)?;
    let abs_diff = (formula - oracle).abs();
    let passed = abs_diff <= opts.tol;
    Ok(Outcome::check(
        json!({
            "formula_value": num(formula),
            "oracle_value": num(oracle),
            "abs_diff": num(abs_diff),
            "fidelity": num(fidelity),
            "threshold": opts.tol,
            "passed": passed,
        }),
        passed,
    ))
}

/// Cutoffs `c/4, c/2, c, 3c/2` for the requested cutoff `c`.
pub fn cutoff_schedule(cutoff: usize) -> Vec<usize> {
    let mut out = vec![cutoff / 4, cutoff / 2, cutoff, cutoff + cutoff / 2];
    out.retain(|&k| k >= 2);
    out.dedup();
    out
}

fn ccr_oracle_compare(s: &GaussianSpec, t: &GaussianSpec, opts: &Resolved) -> Result<Outcome> {
    let oracle = overlap_ccr_on(s, t, CCR_ORACLE_THRESHOLD / 10.0, &cutoff_schedule(opts.cutoff))?;
    let formula = quasifree::ccr::trans_prob_ccr(&s.covariance(oracle.cutoff)?, &t.covariance(oracle.cutoff)?)?;
    let abs_diff = (formula - oracle.value).abs();
    let threshold = opts.tol.max(CCR_ORACLE_THRESHOLD);
    let passed = abs_diff <= threshold;
    Ok(Outcome::check(
        json!({
            "formula_value": num(formula),
            "oracle_value": num(oracle.value),
            "abs_diff": num(abs_diff),
            "oracle_cutoff": oracle.cutoff,
            "oracle_increment": num(oracle.increment),
            "threshold": threshold,
            "passed": passed,
        }),
        passed,
    ))
}

pub fn demo_counterexample(opts: &Resolved) -> Result<Outcome> {
    let family = car_counterexample();
    let v = classify_sequence(&family, opts.n_max, DEFAULT_EPS)?;
    let mut results = sequence_json(&v);
    let expected = v.kind == VerdictKind::QuasiEquivalent
        && v.transition_product == 0.0
        && v.meet_ranks.iter().any(|&(_, r)| r >= 1);
    results["matches_expectation"] = json!(expected);
    Ok(Outcome::check(results, expected))
}
