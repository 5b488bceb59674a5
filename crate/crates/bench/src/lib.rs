//! Fixtures shared by the benchmarks.

use qdirichlet_core::dirichlet::DirichletGenerator;
use qdirichlet_core::fock::{self, FockSpec};
use qdirichlet_core::StandardFormContext;

/// Ornstein–Uhlenbeck generator (`X = A*`, matched `λ`) at the given truncation.
pub fn ou_generator(dim: usize, beta: f64) -> (StandardFormContext, DirichletGenerator) {
    let spec = FockSpec::linear(dim, beta).expect("valid spec");
    let ctx = StandardFormContext::from_spec(&spec).expect("context");
    let x = fock::ladder_power(&spec, 1).expect("ladder");
    let lambda = (-beta / 4.0).exp();
    let gen = DirichletGenerator::with_lambda(x, lambda, &ctx).expect("generator");
    (ctx, gen)
}
