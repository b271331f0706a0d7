//! Countable product states built from one small block per mode.
//!
//! A family assigns to every mode index `k ≥ 1` a pair of covariances of a
//! fixed small dimension. The product states on the infinite tensor product
//! are quasi-equivalent iff the per-mode Hilbert-Schmidt distances are square
//! summable, and their transition probability is the product of the per-mode
//! ones. Partial sums up to `N_max` are inspected over dyadic blocks to give
//! a verdict, with an explicit `Inconclusive` outcome.

use rayon::prelude::*;
use serde::Serialize;

use crate::car::{meet_criterion, qe_distance_car, trans_prob_car, CarCovariance, CarStatePair};
use crate::ccr::{ccr_transition, qe_distance_ccr, CcrCovariance};
use crate::error::{Error, Result};
use crate::verdict::{Reason, VerdictKind};

/// Per-mode transition probabilities at or below this count as zero.
pub const ZERO_TP: f64 = 1e-14;
pub const MIN_N_MAX: usize = 64;
pub const DEFAULT_EPS: f64 = 1e-3;
/// A dyadic block increment at least this fraction of the previous one
/// counts as non-decaying.
const PERSISTENCE: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FamilyKind {
    Car,
    Ccr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModePair {
    Car(CarStatePair),
    Ccr(CcrCovariance, CcrCovariance),
}

#[derive(Debug, Clone, PartialEq)]
enum Rule {
    /// `μ_k = mu`, `ν_k = mu - a k^{-p}`.
    CarPower { mu: f64, a: f64, p: f64 },
    /// Thermal scales `c_k = base + a k^{-p}` against `c'_k = base`.
    CcrThermalPower { base: f64, a: f64, p: f64 },
    /// `(μ_k, ν_k)` listed; the last pair repeats forever.
    CarLiteral(Vec<(f64, f64)>),
    /// Thermal scales `(c_k, c'_k)` listed; the last pair repeats forever.
    CcrLiteral(Vec<(f64, f64)>),
    /// Mode 1 Fock against co-Fock, every later mode identical.
    CarCounterexample,
    /// Mode `k` is the direct sum of mode `k` of each part.
    Concat(Box<ModeFamily>, Box<ModeFamily>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeFamily {
    rule: Rule,
}

fn check_mu(mu: f64, what: &str) -> Result<()> {
    if !mu.is_finite() || mu.abs() > 0.5 {
        return Err(Error::InvalidFamily(format!("{what} = {mu} outside [-1/2, 1/2]")));
    }
    Ok(())
}

fn check_scale(c: f64, what: &str) -> Result<()> {
    if !c.is_finite() || c < 1.0 {
        return Err(Error::InvalidFamily(format!("{what} = {c} below the vacuum value 1")));
    }
    Ok(())
}

fn check_power(a: f64, p: f64) -> Result<()> {
    if !a.is_finite() || !p.is_finite() || p < 0.0 {
        return Err(Error::InvalidFamily(format!("need finite a and p >= 0, got a = {a}, p = {p}")));
    }
    Ok(())
}

impl ModeFamily {
    /// `μ_k = mu` against `ν_k = mu - a k^{-p}`.
    pub fn car_power(mu: f64, a: f64, p: f64) -> Result<Self> {
        check_power(a, p)?;
        check_mu(mu, "μ")?;
        // k^{-p} is monotone, so the extremes are k = 1 and k → ∞
        check_mu(mu - a, "ν_1")?;
        Ok(ModeFamily { rule: Rule::CarPower { mu, a, p } })
    }

    /// Thermal scales `c_k = base + a k^{-p}` against `base`.
    pub fn ccr_thermal_power(base: f64, a: f64, p: f64) -> Result<Self> {
        check_power(a, p)?;
        check_scale(base, "base")?;
        check_scale(base + a, "c_1")?;
        Ok(ModeFamily { rule: Rule::CcrThermalPower { base, a, p } })
    }

    pub fn car_literal(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidFamily("empty literal list".into()));
        }
        for &(m, n) in &pairs {
            check_mu(m, "μ")?;
            check_mu(n, "ν")?;
        }
        Ok(ModeFamily { rule: Rule::CarLiteral(pairs) })
    }

    pub fn ccr_literal(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidFamily("empty literal list".into()));
        }
        for &(c1, c2) in &pairs {
            check_scale(c1, "c")?;
            check_scale(c2, "c'")?;
        }
        Ok(ModeFamily { rule: Rule::CcrLiteral(pairs) })
    }

    pub fn concat(first: ModeFamily, second: ModeFamily) -> Result<Self> {
        if first.kind() != second.kind() {
            return Err(Error::InvalidFamily("cannot concatenate CAR and CCR families".into()));
        }
        Ok(ModeFamily { rule: Rule::Concat(Box::new(first), Box::new(second)) })
    }

    /// Builds a family from a rule id and flat parameter list:
    ///
    /// | rule | params |
    /// |---|---|
    /// | `car-power` | `mu, a, p` |
    /// | `ccr-thermal-power` | `base, a, p` |
    /// | `car-literal` | `μ_1, ν_1, μ_2, ν_2, ...` |
    /// | `ccr-literal` | `c_1, c'_1, c_2, c'_2, ...` |
    /// | `car-counterexample` | none |
    pub fn from_spec(rule: &str, params: &[f64]) -> Result<Self> {
        let want = |n: usize| -> Result<()> {
            if params.len() != n {
                return Err(Error::InvalidFamily(format!(
                    "rule {rule} takes {n} parameters, got {}",
                    params.len()
                )));
            }
            Ok(())
        };
        let pairs = || -> Result<Vec<(f64, f64)>> {
            if params.is_empty() || params.len() % 2 == 1 {
                return Err(Error::InvalidFamily(format!(
                    "rule {rule} takes a nonempty even number of parameters"
                )));
            }
            Ok(params.chunks(2).map(|p| (p[0], p[1])).collect())
        };
        match rule {
            "car-power" => {
                want(3)?;
                Self::car_power(params[0], params[1], params[2])
            }
            "ccr-thermal-power" => {
                want(3)?;
                Self::ccr_thermal_power(params[0], params[1], params[2])
            }
            "car-literal" => Self::car_literal(pairs()?),
            "ccr-literal" => Self::ccr_literal(pairs()?),
            "car-counterexample" => {
                want(0)?;
                Ok(car_counterexample())
            }
            other => Err(Error::InvalidFamily(format!("unknown rule {other}"))),
        }
    }

    pub fn kind(&self) -> FamilyKind {
        match &self.rule {
            Rule::CarPower { .. } | Rule::CarLiteral(_) | Rule::CarCounterexample => FamilyKind::Car,
            Rule::CcrThermalPower { .. } | Rule::CcrLiteral(_) => FamilyKind::Ccr,
            Rule::Concat(a, _) => a.kind(),
        }
    }

    /// The covariance pair of mode `k ≥ 1`.
    pub fn mode(&self, k: usize) -> Result<ModePair> {
        if k == 0 {
            return Err(Error::InvalidFamily("modes are numbered from 1".into()));
        }
        let kf = k as f64;
        let car = |m: f64, n: f64| -> Result<ModePair> {
            Ok(ModePair::Car(CarStatePair::new(CarCovariance::mu_block(m)?, CarCovariance::mu_block(n)?)?))
        };
        let ccr = |c1: f64, c2: f64| -> Result<ModePair> {
            Ok(ModePair::Ccr(CcrCovariance::thermal_mode(c1)?, CcrCovariance::thermal_mode(c2)?))
        };
        let listed = |v: &[(f64, f64)]| v[(k - 1).min(v.len() - 1)];
        match &self.rule {
            Rule::CarPower { mu, a, p } => car(*mu, mu - a * kf.powf(-p)),
            Rule::CcrThermalPower { base, a, p } => ccr(base + a * kf.powf(-p), *base),
            Rule::CarLiteral(v) => {
                let (m, n) = listed(v);
                car(m, n)
            }
            Rule::CcrLiteral(v) => {
                let (c1, c2) = listed(v);
                ccr(c1, c2)
            }
            Rule::CarCounterexample => {
                if k == 1 {
                    car(0.5, -0.5)
                } else {
                    car(0.3, 0.3)
                }
            }
            Rule::Concat(a, b) => match (a.mode(k)?, b.mode(k)?) {
                (ModePair::Car(x), ModePair::Car(y)) => Ok(ModePair::Car(CarStatePair::new(
                    x.s.direct_sum(&y.s),
                    x.t.direct_sum(&y.t),
                )?)),
                (ModePair::Ccr(s1, t1), ModePair::Ccr(s2, t2)) => {
                    Ok(ModePair::Ccr(s1.direct_sum(&s2), t1.direct_sum(&t2)))
                }
                _ => Err(Error::InvalidFamily("mixed family kinds".into())),
            },
        }
    }
}

/// Mode 1 is Fock (`μ = 1/2`) against co-Fock (`ν = -1/2`); all other modes
/// coincide. The states are quasi-equivalent, a finite perturbation, while
/// the transition probability vanishes.
pub fn car_counterexample() -> ModeFamily {
    ModeFamily { rule: Rule::CarCounterexample }
}

/// Per-mode quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeTerm {
    /// Squared Hilbert-Schmidt distance; infinite when the CCR metrics
    /// are inequivalent.
    pub qe: f64,
    /// Transition probability of the mode.
    pub t: f64,
}

impl ModeTerm {
    pub fn neg_log_t(&self) -> f64 {
        if self.t <= ZERO_TP {
            f64::INFINITY
        } else {
            -self.t.ln()
        }
    }
}

pub fn mode_term(pair: &ModePair) -> Result<ModeTerm> {
    match pair {
        ModePair::Car(p) => Ok(ModeTerm { qe: qe_distance_car(p)?.powi(2), t: trans_prob_car(p)? }),
        ModePair::Ccr(s, t) => {
            let qe = qe_distance_ccr(s, t)?.hs_distance.map_or(f64::INFINITY, |d| d * d);
            Ok(ModeTerm { qe, t: ccr_transition(s, t)?.t })
        }
    }
}

/// Terms for modes `1..=n`, evaluated in parallel and returned in order.
pub fn mode_terms(family: &ModeFamily, n: usize) -> Result<Vec<ModeTerm>> {
    (1..=n)
        .into_par_iter()
        .map(|k| mode_term(&family.mode(k)?))
        .collect()
}

/// `Σ_{k≤N}` of the squared per-mode Hilbert-Schmidt distances.
pub fn partial_qe_sum(family: &ModeFamily, n: usize) -> Result<f64> {
    Ok(mode_terms(family, n)?.iter().map(|m| m.qe).sum())
}

/// `Σ_{k≤N} -log t_k`, infinite once some `t_k ≤ 1e-14`.
pub fn partial_log_tp(family: &ModeFamily, n: usize) -> Result<f64> {
    Ok(mode_terms(family, n)?.iter().map(ModeTerm::neg_log_t).sum())
}

/// `∏_{k≤N} t_k`.
pub fn transition_product(family: &ModeFamily, n: usize) -> Result<f64> {
    Ok((-partial_log_tp(family, n)?).exp())
}

/// Behaviour of a series of nonnegative terms judged from its partial sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Trend {
    Convergent,
    Divergent,
    Undecided,
}

impl Trend {
    fn conclusive(self) -> bool {
        self != Trend::Undecided
    }
}

/// Dyadic-block test on prefix sums `sums[k] = Σ_{j≤k}` (with `sums[0] = 0`).
///
/// With `I = S(N) - S(N/2)` and `I' = S(N/2) - S(N/4)`: convergent when
/// `I < eps`; divergent when some term is infinite, or `I ≥ eps` and the
/// block increments do not decay (`I ≥ 0.9 I'`); undecided otherwise.
pub fn series_trend(sums: &[f64], eps: f64) -> Trend {
    let n = sums.len() - 1;
    let (s1, s2, s4) = (sums[n], sums[n / 2], sums[n / 4]);
    if s1.is_infinite() {
        return Trend::Divergent;
    }
    let inc = s1 - s2;
    let prev = s2 - s4;
    if inc < eps {
        Trend::Convergent
    } else if inc >= PERSISTENCE * prev {
        Trend::Divergent
    } else {
        Trend::Undecided
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SequenceVerdict {
    pub kind: VerdictKind,
    pub reason: Reason,
    pub family_kind: FamilyKind,
    pub n_used: usize,
    /// Mode counts at which the partial sums below are reported: powers of
    /// two and `n_used`.
    pub checkpoints: Vec<usize>,
    pub qe_partial_sums: Vec<f64>,
    pub neg_log_t_partial_sums: Vec<f64>,
    pub qe_trend: Trend,
    pub tp_trend: Trend,
    /// `∏_{k≤N} t_k`.
    pub transition_product: f64,
    /// Modes with vanishing transition probability.
    pub singular_modes: Vec<usize>,
    /// `(mode, rank of P ∧ (I - Q))` for singular CAR modes.
    pub meet_ranks: Vec<(usize, usize)>,
}

fn prefix(terms: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut acc = 0.0;
    for x in terms {
        acc += x;
        out.push(acc);
    }
    out
}

fn checkpoints(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(1usize), |k| k.checked_mul(2))
        .take_while(|&k| k <= n)
        .collect();
    if out.last() != Some(&n) {
        out.push(n);
    }
    out
}

/// Quasi-equivalent/disjoint verdict for a product family.
///
/// CAR verdicts come from the Hilbert-Schmidt series alone. CCR verdicts
/// combine both series, which must agree when both are conclusive; a
/// disagreement is reported as [`Error::ConsistencyViolation`].
pub fn classify_sequence(family: &ModeFamily, n_max: usize, eps: f64) -> Result<SequenceVerdict> {
    if n_max < MIN_N_MAX {
        return Err(Error::InvalidFamily(format!("N_max must be at least {MIN_N_MAX}, got {n_max}")));
    }
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidFamily(format!("eps must be positive, got {eps}")));
    }
    let terms = mode_terms(family, n_max)?;
    let qe = prefix(terms.iter().map(|m| m.qe));
    let tp = prefix(terms.iter().map(ModeTerm::neg_log_t));
    let qe_trend = series_trend(&qe, eps);
    let tp_trend = series_trend(&tp, eps);

    let (kind, reason) = match family.kind() {
        FamilyKind::Car => hs_verdict(qe_trend),
        FamilyKind::Ccr => {
            if qe_trend.conclusive() && tp_trend.conclusive() && qe_trend != tp_trend {
                return Err(Error::ConsistencyViolation(format!(
                    "Hilbert-Schmidt series {qe_trend:?} but -log t series {tp_trend:?} at N = {n_max}"
                )));
            }
            match (qe_trend, tp_trend) {
                (Trend::Undecided, Trend::Convergent) => {
                    (VerdictKind::QuasiEquivalent, Reason::PositiveTransitionProbability)
                }
                (Trend::Undecided, Trend::Divergent) => {
                    (VerdictKind::Disjoint, Reason::VanishingTransitionProduct)
                }
                (q, _) => hs_verdict(q),
            }
        }
    };

    let singular_modes: Vec<usize> = (1..=n_max).filter(|&k| terms[k - 1].t <= ZERO_TP).collect();
    let meet_ranks = match family.kind() {
        FamilyKind::Car => singular_modes
            .iter()
            .map(|&k| match family.mode(k)? {
                ModePair::Car(p) => Ok((k, meet_criterion(&p)?)),
                ModePair::Ccr(..) => Err(Error::Internal("CCR mode in a CAR family".into())),
            })
            .collect::<Result<_>>()?,
        FamilyKind::Ccr => Vec::new(),
    };
    let cps = checkpoints(n_max);
    Ok(SequenceVerdict {
        kind,
        reason,
        family_kind: family.kind(),
        n_used: n_max,
        qe_partial_sums: cps.iter().map(|&k| qe[k]).collect(),
        neg_log_t_partial_sums: cps.iter().map(|&k| tp[k]).collect(),
        checkpoints: cps,
        qe_trend,
        tp_trend,
        transition_product: (-tp[n_max]).exp(),
        singular_modes,
        meet_ranks,
    })
}

fn hs_verdict(trend: Trend) -> (VerdictKind, Reason) {
    match trend {
        Trend::Convergent => (VerdictKind::QuasiEquivalent, Reason::HsConvergence),
        Trend::Divergent => (VerdictKind::Disjoint, Reason::HsDivergence),
        Trend::Undecided => (VerdictKind::Inconclusive, Reason::Undecided),
    }
}
