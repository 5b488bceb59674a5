//! Config-driven execution of a check suite.
//!
//! A scenario file names a Fock space, an operator `X`, a modular parameter
//! `λ` (or `"auto"`), evaluation times, a seed and the checks to run. Unknown
//! keys and unknown check identifiers are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abelian::{self, AtomicSpace, AtomicSpaceConfig};
use crate::deformation::{self, FunctionSpec, QuadratureSpec};
use crate::dirichlet::{self, DirichletGenerator};
use crate::error::Error;
use crate::fock::{self, AffiliatedOperator, FockSpec};
use crate::linalg::{self, CMatrix, C64};
use crate::report::{check_info, Report, Status};
use crate::semigroup::{self, SemigroupHandle};
use crate::standard_form::StandardFormContext;

pub const SCHEMA_VERSION: u32 = 1;

/// Checks whose tolerance can be overridden from the config.
pub const TUNABLE: &[(&str, f64)] = &[("deformed_eigenvector", 1e-9), ("deformation_crosscheck", 1e-6)];

/// How `X` is specified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum XSpec {
    LadderPower(usize),
    Deformed(FunctionSpec),
    /// JSON file with `re` (and optionally `im`) given as row arrays,
    /// resolved relative to the scenario file.
    MatrixFile(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Value(f64),
    Keyword(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    pub fock: FockSpec,
    pub x: XSpec,
    pub lambda: LambdaSpec,
    pub times: Vec<f64>,
    pub checks: Vec<String>,
    pub seed: u64,
    pub samples: usize,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abelian: Option<AtomicSpaceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan_grid: Option<Vec<f64>>,
    /// Wall-clock budget for the whole scenario; checks starting after it
    /// is exhausted are reported as skipped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_seconds: Option<f64>,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numerical conditioning abort: {0}")]
    Conditioning(String),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl ScenarioError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Parse(_) => 2,
            ScenarioError::Validation(_) | ScenarioError::Output(_) => 3,
            ScenarioError::Conditioning(_) => 4,
        }
    }
}

impl From<Error> for ScenarioError {
    fn from(e: Error) -> Self {
        match e {
            Error::Conditioning { .. } | Error::Quadrature(_) => ScenarioError::Conditioning(e.to_string()),
            other => ScenarioError::Validation(other.to_string()),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::Parse(format!("{}: {e}", path.display())))?;
        let mut s = Self::from_json(&text)?;
        s.base_dir = path.parent().map(Path::to_path_buf);
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let fail = |m: String| Err(ScenarioError::Validation(m));
        if self.schema_version != SCHEMA_VERSION {
            return fail(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                self.schema_version
            ));
        }
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return fail(format!("scenario name {:?} must be nonempty [A-Za-z0-9_-]", self.name));
        }
        self.fock.validate()?;
        for c in &self.checks {
            if check_info(c).is_none() {
                return fail(format!("unknown check identifier {c:?}"));
            }
        }
        for (k, v) in &self.tolerances {
            if !TUNABLE.iter().any(|(id, _)| id == k) {
                return fail(format!("tolerance override not supported for {k:?}"));
            }
            if !(*v > 0.0 && v.is_finite()) {
                return fail(format!("tolerance for {k} must be positive, got {v}"));
            }
        }
        if let Some(t) = self.times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            return fail(format!("times must be finite and nonnegative, got {t}"));
        }
        let timed = ["markov", "complete_positivity", "semigroup_law", "superbounded", "heat_trace_bound"];
        if self.times.is_empty() {
            if let Some(c) = self.checks.iter().find(|c| timed.contains(&c.as_str())) {
                return fail(format!("check {c} needs a nonempty times array"));
            }
        }
        match &self.lambda {
            LambdaSpec::Value(l) if !(*l > 0.0 && l.is_finite()) => {
                return fail(format!("lambda must be positive, got {l}"));
            }
            LambdaSpec::Keyword(k) if k != "auto" => {
                return fail(format!("lambda must be a positive number or \"auto\", got {k:?}"));
            }
            _ => {}
        }
        if let XSpec::Deformed(f) = &self.x {
            f.validate()?;
        }
        if let Some(q) = &self.quadrature {
            q.validate()?;
        }
        if let Some(g) = &self.scan_grid {
            if g.is_empty() || g.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
                return fail("scan_grid must be nonempty with nonnegative times".into());
            }
        }
        if let Some(b) = self.budget_seconds {
            if !(b > 0.0) {
                return fail(format!("budget_seconds must be positive, got {b}"));
            }
        }
        if let Some(a) = &self.abelian {
            AtomicSpace::from_config(a)?;
        }
        Ok(())
    }

    fn load_matrix(&self, path: &Path) -> Result<CMatrix, ScenarioError> {
        let full = match &self.base_dir {
            Some(d) if path.is_relative() => d.join(path),
            _ => path.to_path_buf(),
        };
        let text = std::fs::read_to_string(&full)
            .map_err(|e| ScenarioError::Validation(format!("{}: {e}", full.display())))?;
        let m: MatrixFile = serde_json::from_str(&text)
            .map_err(|e| ScenarioError::Parse(format!("{}: {e}", full.display())))?;
        let n = self.fock.dim;
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !shape_ok(&m.re) || !m.im.as_ref().is_none_or(shape_ok) {
            return Err(ScenarioError::Validation(format!(
                "matrix file must be {n} x {n} to match fock.dim"
            )));
        }
        Ok(CMatrix::from_fn(n, n, |j, k| {
            C64::new(m.re[j][k], m.im.as_ref().map_or(0.0, |im| im[j][k]))
        }))
    }
}

/// Overrides applied on top of a scenario file.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct NamedSpectrum {
    pub object: String,
    pub eigenvalues: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub scenario: String,
    pub seed: u64,
    pub lambda: f64,
    pub reports: Vec<Report>,
    pub spectra: Vec<NamedSpectrum>,
}

impl Outcome {
    /// 0 iff no report failed.
    pub fn exit_code(&self) -> i32 {
        if self.reports.iter().any(|r| r.status == Status::Fail) {
            1
        } else {
            0
        }
    }
}

struct Prepared<'a> {
    scn: &'a Scenario,
    seed: u64,
    spec: FockSpec,
    ctx: StandardFormContext,
    x: AffiliatedOperator,
    lambda: f64,
    quad: QuadratureSpec,
    generator: OnceLock<Result<DirichletGenerator, Error>>,
    g0: OnceLock<Result<SemigroupHandle, Error>>,
}

impl Prepared<'_> {
    fn generator(&self) -> Result<&DirichletGenerator, Error> {
        self.generator
            .get_or_init(|| {
                DirichletGenerator::with_lambda(self.x.clone(), self.lambda, &self.ctx).map(|g| {
                    g.realize();
                    g
                })
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn g0(&self) -> Result<&SemigroupHandle, Error> {
        self.g0
            .get_or_init(|| SemigroupHandle::from_h0(&linalg::diag_real(&self.spec.energies())))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn ladder_m(&self) -> Option<usize> {
        match self.scn.x {
            XSpec::LadderPower(m) => Some(m),
            _ => None,
        }
    }

    fn function(&self) -> Option<&FunctionSpec> {
        match &self.scn.x {
            XSpec::Deformed(f) => Some(f),
            _ => None,
        }
    }

    fn tolerance(&self, id: &str) -> f64 {
        self.scn.tolerances.get(id).copied().unwrap_or_else(|| {
            TUNABLE
                .iter()
                .find(|(k, _)| *k == id)
                .map(|(_, v)| *v)
                .expect("tunable check")
        })
    }

    fn positive_times(&self) -> Vec<f64> {
        self.scn.times.iter().copied().filter(|t| *t > 0.0).collect()
    }

    fn scan_grid(&self) -> Vec<f64> {
        self.scn
            .scan_grid
            .clone()
            .unwrap_or_else(|| (1..=20).map(|k| 0.05 * k as f64).collect())
    }

    fn abelian(&self) -> Result<Option<AtomicSpace>, Error> {
        self.scn.abelian.as_ref().map(AtomicSpace::from_config).transpose()
    }

    fn run(&self, id: &str) -> Result<Vec<Report>, Error> {
        let seed = self.seed;
        let samples = self.scn.samples;
        let x = &self.x.matrix;
        let na = |why: &str| Ok(vec![Report::new(id).note(why).with_status(Status::NotApplicable)]);
        let one = |r: Report| Ok(vec![r]);
        match id {
            "ladder_identities" => match self.ladder_m() {
                Some(m) => one(fock::product_identity_check(&self.spec, m)?),
                None => na("X is not a ladder power"),
            },
            "modular_eigenvector" => one(dirichlet::modular_eigenvector_check(x, &self.ctx, self.lambda.powi(2))?),
            "generator_identity" => one(dirichlet::generator_identity_check(x, self.lambda)),
            "coercivity_identity" => one(dirichlet::coercivity_identity_check(self.generator()?)),
            "coercivity_bound" => one(dirichlet::coercivity_bound_check(self.generator()?, 1.0, 1.0)?),
            "minmax_domination" => one(dirichlet::minmax_domination_check(self.generator()?)),
            "form_expansion" => one(dirichlet::form_expansion_check(self.generator()?, seed, samples)),
            "j_reality" => one(dirichlet::j_reality_check(self.generator()?, seed, samples)),
            "beurling_deny" => one(dirichlet::beurling_deny_check(self.generator()?, seed, samples)?),
            "conservativeness" => {
                let r = dirichlet::conservativeness_check(x, self.lambda, 1.0 / self.lambda, &self.ctx)?;
                let g = self.generator()?;
                let handle = SemigroupHandle::from_dirichlet(g);
                let xi0 = self.ctx.xi0();
                let fixed = (&handle.evolve(1.0, xi0)? - xi0).norm();
                one(r
                    .param("lambda", self.lambda)
                    .metric("kernel_residual", g.kernel_residual())
                    .metric("evolved_xi0_displacement", fixed))
            }
            "conservativeness_mismatch" => {
                let l = 1.1 * self.lambda;
                let inner = dirichlet::conservativeness_check(x, l, 1.0 / l, &self.ctx)?;
                let energy = inner.metrics["form_at_xi0"];
                let eig_fails = inner.metrics["eigen_residual"] > 1e-10 || inner.metrics["tomita_residual"] > 1e-10;
                let mut r = Report::new(id)
                    .param("lambda", l)
                    .param("configured_lambda", self.lambda);
                for (k, v) in &inner.metrics {
                    r = r.metric(k, *v);
                }
                one(r
                    .residual(if energy > 1e-4 { 0.0 } else { 1e-4 - energy }, 0.0)
                    .require(!inner.pass && eig_fails))
            }
            "intertwining" => one(dirichlet::intertwining_check(x, self.lambda, &self.ctx, seed, samples)?),
            "markov" => {
                let h = SemigroupHandle::from_dirichlet(self.generator()?);
                one(semigroup::markov_check(&h, &self.ctx, &self.scn.times, seed, samples)?)
            }
            "complete_positivity" => {
                let h = SemigroupHandle::from_dirichlet(self.generator()?);
                one(semigroup::cp_check(&h, &self.scn.times)?)
            }
            "semigroup_law" => {
                let h = SemigroupHandle::from_dirichlet(self.generator()?);
                one(semigroup::semigroup_law_check(&h, &self.scn.times, seed, samples.min(20))?)
            }
            "q_leading_coefficient" => match self.ladder_m() {
                Some(m) => one(dirichlet::q_leading_coefficient_check(&self.spec, m)?),
                None => na("X is not a ladder power"),
            },
            "heat_trace_bound" => {
                let g = self.generator()?;
                let h = SemigroupHandle::from_dirichlet(g);
                let profile = match (self.ladder_m(), &self.spec.g) {
                    (Some(m), fock::Profile::Linear) => Some(dirichlet::ladder_q_profile(m, self.lambda, self.spec.dim)),
                    _ => None,
                };
                let times = self.positive_times();
                if times.is_empty() {
                    return na("no positive times");
                }
                times
                    .iter()
                    .map(|t| semigroup::heat_trace_bound_check(g, &h, *t, profile.as_deref()))
                    .collect()
            }
            "superbounded" => {
                let h = self.g0()?;
                self.scn
                    .times
                    .iter()
                    .map(|t| semigroup::superbounded_check(h, &self.ctx, *t, seed, samples))
                    .collect()
            }
            "superbounded_scan" => {
                let grid = self.scan_grid();
                let mut sorted = grid.clone();
                sorted.sort_by(f64::total_cmp);
                let step = sorted.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
                let bound = self.spec.beta / 4.0 + step;
                let (r, _) = semigroup::superbounded_threshold_scan(self.g0()?, &self.ctx, &grid, seed, samples, Some(bound))?;
                one(r)
            }
            "counting_bound" => one(semigroup::counting_bound_check(&linalg::diag_real(&self.spec.energies()))?),
            "deformation_crosscheck" => match self.function() {
                Some(f) => one(deformation::deformation_crosscheck(f, &self.spec, &self.quad, seed, 20, self.tolerance(id))?),
                None => na("X is not a deformed annihilator"),
            },
            "deformed_eigenvector" => match self.function().and_then(|f| f.lambda_target()) {
                Some(l) => one(deformation::modular_eigenvector_check(x, &self.ctx, l, self.tolerance(id))?),
                None => na("X is not built from an analytic family"),
            },
            "deformed_ccr" => match self.function() {
                Some(f) => {
                    let profile = deformation::hat_profile(f, &self.spec, &self.quad)?;
                    one(deformation::ccr_relations_check(x, &profile)?)
                }
                None => na("X is not a deformed annihilator"),
            },
            "hyperbolic_commutator" => one(deformation::hyperbolic_commutator_check(&self.spec)?),
            "abelian_threshold" => match self.abelian()? {
                Some(space) => one(abelian::abelian_iff_check(&space, seed, samples)?),
                None => na("no abelian section in the scenario"),
            },
            "abelian_embedding" => match self.abelian()? {
                Some(space) => {
                    let grid = match &self.scn.scan_grid {
                        Some(g) => g.clone(),
                        None => {
                            let t0 = abelian::threshold_t0(&space);
                            let top = if t0.is_finite() { t0 * 1.5 + 0.1 } else { 4.0 };
                            let n = (top / 0.01).ceil() as usize;
                            (0..=n).map(|k| 0.01 * k as f64).collect()
                        }
                    };
                    one(abelian::abelian_embedding_check(&space, &grid)?)
                }
                None => na("no abelian section in the scenario"),
            },
            other => Err(Error::InvalidSpec(format!("unknown check {other}"))),
        }
    }
}

/// Builds the operator and `λ` named by the scenario.
fn prepare<'a>(scn: &'a Scenario, opts: &RunOptions) -> Result<Prepared<'a>, ScenarioError> {
    scn.validate()?;
    let spec = scn.fock.clone();
    let ctx = StandardFormContext::from_spec(&spec)?;
    let quad = scn.quadrature.clone().unwrap_or_default();
    let x = match &scn.x {
        XSpec::LadderPower(m) => fock::ladder_power(&spec, *m)?,
        XSpec::Deformed(f) => deformation::deformed_operator(f, &spec, &quad)?,
        XSpec::MatrixFile(p) => AffiliatedOperator::new(scn.load_matrix(p)?, p.display().to_string())?,
    };
    let lambda = match &scn.lambda {
        LambdaSpec::Value(l) => *l,
        LambdaSpec::Keyword(_) => {
            let (mu, res) = dirichlet::modular_eigenvalue(&x.matrix, &ctx).map_err(|e| match e {
                Error::Degenerate(m) => ScenarioError::Validation(format!("lambda = auto: {m}")),
                other => other.into(),
            })?;
            if res > 1e-8 || mu <= 0.0 {
                return Err(ScenarioError::Validation(format!(
                    "lambda = auto requires X xi0 to be a modular eigenvector; relative residual {res:.3e}"
                )));
            }
            mu.sqrt()
        }
    };
    Ok(Prepared {
        scn,
        seed: opts.seed.unwrap_or(scn.seed),
        spec,
        ctx,
        x,
        lambda,
        quad,
        generator: OnceLock::new(),
        g0: OnceLock::new(),
    })
}

/// Runs every declared check; reports come back in declaration order.
pub fn run_scenario(scn: &Scenario, opts: &RunOptions) -> Result<Outcome, ScenarioError> {
    let prepared = prepare(scn, opts)?;
    let start = Instant::now();
    let budget = scn.budget_seconds;
    let run_one = |id: &String| -> Result<Vec<Report>, Error> {
        if let Some(b) = budget {
            if start.elapsed().as_secs_f64() > b {
                return Ok(vec![Report::new(id)
                    .note("skipped (budget)")
                    .with_status(Status::Skipped)]);
            }
        }
        let t = Instant::now();
        let mut reports = prepared.run(id)?;
        let ms = t.elapsed().as_secs_f64() * 1e3;
        for r in &mut reports {
            r.wall_time_ms = ms;
        }
        Ok(reports)
    };
    let results: Vec<Result<Vec<Report>, Error>> = match opts.jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| ScenarioError::Validation(format!("thread pool: {e}")))?;
            pool.install(|| scn.checks.par_iter().map(run_one).collect())
        }
        None => scn.checks.par_iter().map(run_one).collect(),
    };
    let mut reports = Vec::new();
    for r in results {
        reports.extend(r?);
    }
    let mut spectra = Vec::new();
    if let Some(Ok(g)) = prepared.generator.get() {
        let h = SemigroupHandle::from_dirichlet(g);
        spectra.push(NamedSpectrum {
            object: "generator".into(),
            eigenvalues: h.spectrum().eigenvalues.clone(),
        });
    }
    if let Some(Ok(h)) = prepared.g0.get() {
        spectra.push(NamedSpectrum {
            object: "g0".into(),
            eigenvalues: h.spectrum().eigenvalues.clone(),
        });
    }
    Ok(Outcome {
        scenario: scn.name.clone(),
        seed: prepared.seed,
        lambda: prepared.lambda,
        reports,
        spectra,
    })
}
