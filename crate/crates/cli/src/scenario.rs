//! Scenario files: what to compute on, plus tolerances and sizes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use quasifree::car::{CarCovariance, CarStatePair};
use quasifree::ccr::CcrCovariance;
use quasifree::ccr_oracle::{GaussianSpec, QuadraticHamiltonian};
use quasifree::sample::{random_car_pair, rng, singular_car_pair};
use quasifree::seqmodel::{FamilyKind, ModeFamily};
use quasifree::{CMatrix, Error, Result};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_CUTOFF: usize = 80;
pub const DEFAULT_N_MAX: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    CarPair,
    CcrPair,
    CarSequence,
    CcrSequence,
}

/// A matrix entry, either `[re, im]` or a bare real number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Complex([f64; 2]),
    Real(f64),
}

/// Row-major list of rows.
pub type Matrix = Vec<Vec<Entry>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPair {
    pub modes: usize,
    /// Force a Fock/co-Fock mode so that the transition probability is 0.
    #[serde(default)]
    pub singular: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    /// Ratios `q_j` of the thermal modes; `0` is the vacuum.
    Thermal(Vec<f64>),
    SqueezedVacuum(f64),
    Gibbs { omega: Matrix, xi: Matrix },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatePair {
    pub s: StateSpec,
    pub t: StateSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub rule: String,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<StatePair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    #[serde(default)]
    pub options: Options,
}

/// Options after flags, scenario values and defaults have been merged.
#[derive(Debug, Clone, Copy)]
pub struct Resolved {
    pub tol: f64,
    pub cutoff: usize,
    pub n_max: usize,
    pub seed: u64,
}

impl Options {
    /// Flags take precedence over the scenario, then the family's mode
    /// count, then defaults. The resolved values are written back so that
    /// the echoed scenario is self-contained.
    pub fn resolve(&mut self, flags: &Options, family_modes: Option<usize>) -> Resolved {
        self.tol = flags.tol.or(self.tol).or(Some(DEFAULT_TOL));
        self.cutoff = flags.cutoff.or(self.cutoff).or(Some(DEFAULT_CUTOFF));
        self.n_max = flags.n_max.or(self.n_max).or(family_modes).or(Some(DEFAULT_N_MAX));
        self.seed = flags.seed.or(self.seed).or(Some(0));
        Resolved {
            tol: self.tol.unwrap(),
            cutoff: self.cutoff.unwrap(),
            n_max: self.n_max.unwrap(),
            seed: self.seed.unwrap(),
        }
    }
}

/// Either explicit covariances or oracle state descriptions.
pub enum CcrInput {
    Matrices(CcrCovariance, CcrCovariance),
    States(GaussianSpec, GaussianSpec),
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Shape { expected: "scenario".into(), found: msg.into() }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario> {
        serde_json::from_str(text).map_err(|e| invalid(format!("malformed scenario: {e}")))
    }

    /// Fills every option; see [`Options::resolve`].
    pub fn resolve(&mut self, flags: &Options) -> Resolved {
        let family_modes = self.family.as_ref().and_then(|f| f.modes);
        self.options.resolve(flags, family_modes)
    }

    pub fn car_pair(&self, opts: &Resolved) -> Result<CarStatePair> {
        self.expect(Kind::CarPair)?;
        match (&self.s, &self.t, &self.random) {
            (Some(s), Some(t), None) => {
                CarStatePair::new(CarCovariance::new(to_matrix(s)?)?, CarCovariance::new(to_matrix(t)?)?)
            }
            (None, None, Some(r)) => {
                if r.modes == 0 {
                    return Err(invalid("random pair with zero modes"));
                }
                let mut g = rng(opts.seed);
                Ok(if r.singular { singular_car_pair(&mut g, r.modes) } else { random_car_pair(&mut g, r.modes) })
            }
            _ => Err(invalid("car-pair needs either `s` and `t` or `random`")),
        }
    }

    pub fn ccr_input(&self) -> Result<CcrInput> {
        self.expect(Kind::CcrPair)?;
        match (&self.s, &self.t, &self.states) {
            (Some(s), Some(t), None) => Ok(CcrInput::Matrices(
                CcrCovariance::from_hermitian(&to_matrix(s)?)?,
                CcrCovariance::from_hermitian(&to_matrix(t)?)?,
            )),
            (None, None, Some(p)) => Ok(CcrInput::States(gaussian(&p.s)?, gaussian(&p.t)?)),
            _ => Err(invalid("ccr-pair needs either `s` and `t` or `states`")),
        }
    }

    pub fn family(&self) -> Result<ModeFamily> {
        let want = match self.kind {
            Kind::CarSequence => FamilyKind::Car,
            Kind::CcrSequence => FamilyKind::Ccr,
            _ => return Err(invalid(format!("expected a sequence scenario, got {:?}", self.kind))),
        };
        let spec = self.family.as_ref().ok_or_else(|| invalid("sequence scenario without `family`"))?;
        let family = ModeFamily::from_spec(&spec.rule, &spec.params)?;
        if family.kind() != want {
            return Err(invalid(format!("rule {} does not match kind {:?}", spec.rule, self.kind)));
        }
        Ok(family)
    }

    fn expect(&self, kind: Kind) -> Result<()> {
        if self.kind != kind {
            return Err(invalid(format!("expected {kind:?} scenario, got {:?}", self.kind)));
        }
        Ok(())
    }
}

impl CcrInput {
    /// Covariances for the formula side.
    pub fn covariances(&self, cutoff: usize) -> Result<(CcrCovariance, CcrCovariance)> {
        match self {
            CcrInput::Matrices(s, t) => Ok((s.clone(), t.clone())),
            CcrInput::States(s, t) => Ok((s.covariance(cutoff)?, t.covariance(cutoff)?)),
        }
    }
}

fn gaussian(spec: &StateSpec) -> Result<GaussianSpec> {
    Ok(match spec {
        StateSpec::Thermal(qs) => GaussianSpec::Thermal(qs.clone()),
        StateSpec::SqueezedVacuum(r) => GaussianSpec::SqueezedVacuum(*r),
        StateSpec::Gibbs { omega, xi } => {
            GaussianSpec::Gibbs(QuadraticHamiltonian::new(to_matrix(omega)?, to_matrix(xi)?)?)
        }
    })
}

pub fn to_matrix(rows: &Matrix) -> Result<CMatrix> {
    let n = rows.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::Shape { expected: format!("{n} entries per row"), found: bad.len().to_string() });
    }
    let entries = rows.iter().flatten().map(|e| match *e {
        Entry::Complex([re, im]) => Complex64::new(re, im),
        Entry::Real(re) => Complex64::new(re, 0.0),
    });
    let m = CMatrix::from_row_iterator(n, n, entries);
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(invalid("non-finite matrix entry"));
    }
    Ok(m)
}
