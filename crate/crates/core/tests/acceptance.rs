//! Acceptance criteria, one line each. Exits nonzero if any criterion fails.

use std::path::Path;
use std::time::Instant;

use qdirichlet_core::abelian::{self, AtomicSpace};
use qdirichlet_core::deformation::{self, FunctionSpec, QuadratureRule, QuadratureSpec};
use qdirichlet_core::dirichlet::{self, DirichletGenerator};
use qdirichlet_core::fock::{self, FockSpec, Profile};
use qdirichlet_core::scenario::{run_scenario, RunOptions, Scenario};
use qdirichlet_core::semigroup::{self, SemigroupHandle};
use qdirichlet_core::standard_form::{sample_general, StandardFormContext};
use qdirichlet_core::{AffiliatedOperator, Report, Result};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn worst(reports: &[Report]) -> f64 {
    reports.iter().map(|r| r.residual).fold(0.0, f64::max)
}

fn random_generators() -> Result<Vec<DirichletGenerator>> {
    let ctx = StandardFormContext::from_spec(&FockSpec::linear(8, 1.0)?)?;
    let mut out = Vec::new();
    for seed in 0..10 {
        let x = AffiliatedOperator::custom(sample_general(8, 1000 + seed).into_matrix())?;
        for lambda in [0.5, 1.0, 2.0] {
            out.push(DirichletGenerator::with_lambda(x.clone(), lambda, &ctx)?);
        }
    }
    Ok(out)
}

fn generator_identity() -> Result<Outcome> {
    let gens = random_generators()?;
    let reports: Vec<Report> = gens
        .iter()
        .map(|g| dirichlet::generator_identity_check(&g.x().matrix, g.lambda()))
        .collect();
    let ok = reports.iter().all(|r| r.pass && r.tolerance == 1e-11);
    Ok(outcome(ok, format!("30 cases, worst relative residual {:.2e}", worst(&reports))))
}

fn coercivity() -> Result<Outcome> {
    let gens = random_generators()?;
    let mut identity = Vec::new();
    let mut bound = Vec::new();
    let mut minmax = Vec::new();
    for g in &gens {
        identity.push(dirichlet::coercivity_identity_check(g));
        bound.push(dirichlet::coercivity_bound_check(g, 1.0, 1.0)?);
        minmax.push(dirichlet::minmax_domination_check(g));
    }
    let ok = [&identity, &bound, &minmax].iter().all(|rs| rs.iter().all(|r| r.pass));
    Ok(outcome(
        ok,
        format!(
            "identity {:.2e}, bound deficit {:.2e} (tol 1e-9 |H|), min-max violation {:.2e}",
            worst(&identity),
            worst(&bound),
            worst(&minmax)
        ),
    ))
}

fn modular_eigenvectors() -> Result<Outcome> {
    let spec = FockSpec::linear(32, 1.0)?;
    let ctx = StandardFormContext::from_spec(&spec)?;
    let mut reports = Vec::new();
    for m in 1..=3 {
        let x = fock::ladder_power(&spec, m)?;
        let mu = (-(m as f64) * 0.5).exp();
        reports.push(dirichlet::modular_eigenvector_check(&x.matrix, &ctx, mu)?);
    }
    let ok = reports.iter().all(|r| r.pass && r.tolerance == 1e-12);
    Ok(outcome(ok, format!("m = 1,2,3, worst residual {:.2e}", worst(&reports))))
}

fn conservativeness() -> Result<Outcome> {
    let spec = FockSpec::linear(16, 1.0)?;
    let ctx = StandardFormContext::from_spec(&spec)?;
    let x = fock::ladder_power(&spec, 1)?;
    let lambda = (-0.25f64).exp();
    let g = DirichletGenerator::with_lambda(x.clone(), lambda, &ctx)?;
    let kernel = g.kernel_residual();
    let handle = SemigroupHandle::from_dirichlet(&g);
    let drift = (&handle.evolve(1.0, ctx.xi0())? - ctx.xi0()).norm();
    let off = 1.1 * lambda;
    let energy = dirichlet::form_value(&x.matrix, off, 1.0 / off, ctx.xi0());
    let control = dirichlet::conservativeness_check(&x.matrix, off, 1.0 / off, &ctx)?;
    let ok = kernel <= 1e-11 && drift <= 1e-10 && energy > 1e-4 && !control.pass;
    Ok(outcome(
        ok,
        format!("|H xi0| {kernel:.2e}, |T_1 xi0 - xi0| {drift:.2e}, mismatched E[xi0] {energy:.4e}"),
    ))
}

fn markov_and_cp() -> Result<Outcome> {
    let spec = FockSpec::linear(8, 1.0)?;
    let ctx = StandardFormContext::from_spec(&spec)?;
    let g = DirichletGenerator::with_lambda(fock::ladder_power(&spec, 1)?, (-0.25f64).exp(), &ctx)?;
    let handle = SemigroupHandle::from_dirichlet(&g);
    let times = [0.1, 1.0, 10.0];
    let markov = semigroup::markov_check(&handle, &ctx, &times, 77, 100)?;
    let cp = semigroup::cp_check(&handle, &times)?;
    Ok(outcome(
        markov.pass && cp.pass,
        format!("markov floor deficit {:.2e}, choi deficit {:.2e}", markov.residual, cp.residual),
    ))
}

fn q_leading_coefficient() -> Result<Outcome> {
    let r = dirichlet::q_leading_coefficient_check(&FockSpec::linear(40, 1.0)?, 1)?;
    let expected = (2.0 * 0.25f64.sinh()).powi(2);
    let ok = r.pass && r.tolerance == 1e-10;
    Ok(outcome(ok, format!("target {expected:.7}, residual {:.2e}", r.residual)))
}

fn heat_trace() -> Result<Outcome> {
    let spec = FockSpec::linear(16, 1.0)?;
    let ctx = StandardFormContext::from_spec(&spec)?;
    let g = DirichletGenerator::with_lambda(fock::ladder_power(&spec, 1)?, (-0.25f64).exp(), &ctx)?;
    let r = semigroup::ladder_heat_trace_bound_check(&g, 1, 1.0)?;
    let m = |k: &str| r.metrics.get(k).copied().unwrap_or(f64::NAN);
    Ok(outcome(
        r.pass,
        format!(
            "trace {:.6e}, slack against analytic q(k) {:.4e}, against truncated Q {:.4e}",
            m("heat_trace"),
            m("profile_slack"),
            m("truncated_slack")
        ),
    ))
}

fn superbounded() -> Result<Outcome> {
    let spec = FockSpec::linear(12, 1.0)?;
    let ctx = StandardFormContext::from_spec(&spec)?;
    let handle = SemigroupHandle::from_h0(&fock::number_operator(12))?;
    let grid: Vec<f64> = (1..=20).map(|k| 0.05 * k as f64).collect();
    let (r, points) = semigroup::superbounded_threshold_scan(&handle, &ctx, &grid, 2024, 200, Some(0.30))?;
    let all_above = points
        .iter()
        .filter(|p| p.t >= 0.30 - 1e-12)
        .all(|p| p.pass_fraction == 1.0);
    let threshold = r.metrics.get("threshold").copied().unwrap_or(f64::INFINITY);
    Ok(outcome(
        r.pass && all_above && threshold <= 0.30 + 1e-12,
        format!("empirical threshold {threshold:.2}"),
    ))
}

fn counting() -> Result<Outcome> {
    let r = semigroup::counting_bound_check(&fock::number_operator(8))?;
    Ok(outcome(r.pass, format!("residual {:.2e}", r.residual)))
}

fn deformation_crosscheck() -> Result<Outcome> {
    let spec = FockSpec::new(12, Profile::Log { offset: 2.0 }, 1.0)?;
    let ctx = StandardFormContext::from_spec(&spec)?;
    let f = FunctionSpec::Cosh { b: 1.0 };
    let quad = QuadratureSpec::new(2.0, 4096, QuadratureRule::Trapezoid)?;
    let cross = deformation::deformation_crosscheck(&f, &spec, &quad, 10, 20, 1e-6)?;
    let x = deformation::deformed_operator(&f, &spec, &quad)?;
    let eig = deformation::modular_eigenvector_check(&x.matrix, &ctx, (-0.25f64).exp(), 1e-6)?;
    Ok(outcome(
        cross.pass && eig.pass,
        format!(
            "operator {:.2e}, transform rel err {:.2e}, eigenvector residual {:.3e} (best fit {:.3e})",
            cross.metrics["operator_residual"],
            cross.metrics["transform_relative_error"],
            eig.residual,
            eig.metrics["best_fit_residual"]
        ),
    ))
}

fn deformed_ccr() -> Result<Outcome> {
    let spec = FockSpec::new(16, Profile::Log { offset: 2.0 }, 1.0)?;
    let f = FunctionSpec::Cosh { b: 1.0 };
    let quad = QuadratureSpec::default();
    let x = deformation::deformed_operator(&f, &spec, &quad)?;
    let ccr = deformation::ccr_relations_check(&x.matrix, &deformation::hat_profile(&f, &spec, &quad)?)?;
    let hyp = deformation::hyperbolic_commutator_check(&FockSpec::linear(16, 1.0)?)?;
    Ok(outcome(
        ccr.pass && hyp.pass && ccr.tolerance <= 1e-12,
        format!("ccr {:.2e}, [A^2,(A*)^2] {:.2e}", ccr.residual, hyp.residual),
    ))
}

fn abelian_iff() -> Result<Outcome> {
    let mut finite = 0;
    let mut ok = true;
    for trial in 0..100 {
        let space = AtomicSpace::random(50, 500 + trial, false);
        let t0 = abelian::threshold_t0(&space);
        if t0 > 0.0 && t0.is_finite() {
            finite += 1;
        }
        ok &= abelian::abelian_iff_check(&space, trial, 10)?.pass;
    }
    Ok(outcome(ok, format!("100 trials, {finite} with 0 < t0 < inf")))
}

fn determinism() -> Result<Outcome> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut paths: Vec<_> = std::fs::read_dir(&dir)
        .expect("bundled scenarios")
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    let mut ok = true;
    for p in &paths {
        let s = Scenario::load(p).expect("bundled scenario parses");
        let run = || run_scenario(&s, &RunOptions::default()).expect("bundled scenario runs");
        let (a, b) = (run(), run());
        let strip = |o: &qdirichlet_core::scenario::Outcome| -> Vec<Report> {
            o.reports.iter().map(Report::numerical_content).collect()
        };
        let spectra = |o: &qdirichlet_core::scenario::Outcome| -> Vec<Vec<f64>> {
            o.spectra.iter().map(|s| s.eigenvalues.clone()).collect()
        };
        ok &= strip(&a) == strip(&b) && spectra(&a) == spectra(&b);
    }
    Ok(outcome(ok, format!("{} scenarios run twice", paths.len())))
}

type Criterion = (&'static str, f64, fn() -> Result<Outcome>);

fn main() {
    let criteria: [Criterion; 13] = [
        ("generator identity", 5.0, generator_identity),
        ("coercivity identity, bound and min-max domination", 10.0, coercivity),
        ("modular eigenvectors of ladder powers", 1.0, modular_eigenvectors),
        ("conservativeness and negative control", 5.0, conservativeness),
        ("markovianity and complete positivity", 60.0, markov_and_cp),
        ("Q-operator leading coefficient", 1.0, q_leading_coefficient),
        ("heat-trace bound", 5.0, heat_trace),
        ("superboundedness threshold", 120.0, superbounded),
        ("counting functions", 5.0, counting),
        ("deformation cross-check", 30.0, deformation_crosscheck),
        ("deformed CCR and hyperbolic commutator", 1.0, deformed_ccr),
        ("abelian iff", 1.0, abelian_iff),
        ("determinism of the bundled suite", f64::INFINITY, determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && secs < *limit, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let budget = if limit.is_finite() { format!(" (limit {limit} s)") } else { String::new() };
        println!(
            "criterion {:>2} {}: {name}: {detail}; {secs:.2} s{budget}",
            i + 1,
            if pass { "PASS" } else { "FAIL" }
        );
        failed += usize::from(!pass);
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
