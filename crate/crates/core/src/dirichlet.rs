//! Derivations `d_X^{μ,ν} = i(μX − ν j(X*))`, the Dirichlet forms they
//! define, and the generator `H_X^λ` assembled two independent ways:
//! by squaring derivation superoperators and from the closed expansion in
//! left/right multiplications.
//!
//! With `j(Y)ξ = ξY*` every object reduces to sandwiches:
//! `d_X^{μ,ν} ξ = i(μXξ − νξX)`, and
//! `H_X^λ ξ = λ²(X*Xξ + ξX*X) + λ⁻²(XX*ξ + ξXX*) − 2(X*ξX + XξX*)`.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::fock::AffiliatedOperator;
use crate::linalg::{self, identity, re, sample_seed, CMatrix, I};
use crate::report::{Report, Status};
use crate::standard_form::{
    hs_inner, jordan_decompose, sample_general, sample_hermitian, HsVector, StandardFormContext,
};
use crate::superop::SuperOperator;

/// Relative tolerance for algebraic identities between dense realizations.
pub const IDENTITY_TOL: f64 = 1e-11;
/// Allowed negativity of a minimum eigenvalue, relative to `‖H‖`.
pub const PSD_TOL: f64 = 1e-9;

fn relative(residual: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        residual / scale
    } else {
        residual
    }
}

/// `ξ ↦ i(μXξ − νξX)` as a superoperator.
pub fn derivation(x: &CMatrix, mu: f64, nu: f64) -> SuperOperator {
    let n = x.nrows();
    let mut d = SuperOperator::new(n);
    d.push(x * (I * mu), identity(n));
    d.push(identity(n) * (-I * nu), x.clone());
    d
}

pub fn derivation_apply(x: &CMatrix, mu: f64, nu: f64, xi: &HsVector) -> HsVector {
    let m = xi.matrix();
    HsVector::new((x * m * re(mu) - m * x * re(nu)) * I)
}

/// `E_X^{μ,ν}[ξ] = ‖d_X^{μ,ν}ξ‖² + ‖d_{X*}^{ν,μ}ξ‖²`.
pub fn form_value(x: &CMatrix, mu: f64, nu: f64, xi: &HsVector) -> f64 {
    let a = derivation_apply(x, mu, nu, xi).norm();
    let b = derivation_apply(&x.adjoint(), nu, mu, xi).norm();
    a * a + b * b
}

/// Real part of the sesquilinear form `E_X^{μ,ν}(ξ|η)`.
pub fn form_pairing(x: &CMatrix, mu: f64, nu: f64, xi: &HsVector, eta: &HsVector) -> f64 {
    let xs = x.adjoint();
    let a = hs_inner(&derivation_apply(x, mu, nu, xi), &derivation_apply(x, mu, nu, eta))
        .expect("same dimension");
    let b = hs_inner(&derivation_apply(&xs, nu, mu, xi), &derivation_apply(&xs, nu, mu, eta))
        .expect("same dimension");
    (a + b).re
}

/// `|d_X^λ|² + |d_{X*}^{λ⁻¹}|²`, composed from derivation superoperators.
pub fn generator_direct(x: &CMatrix, lambda: f64) -> SuperOperator {
    let d1 = derivation(x, lambda, 1.0 / lambda);
    let d2 = derivation(&x.adjoint(), 1.0 / lambda, lambda);
    d1.adjoint().compose(&d1).plus(&d2.adjoint().compose(&d2))
}

/// Closed expansion of the generator in left and right multiplications.
pub fn generator_expanded(x: &CMatrix, lambda: f64) -> SuperOperator {
    let n = x.nrows();
    let xs = x.adjoint();
    let xs_x = &xs * x;
    let x_xs = x * &xs;
    let l2 = re(lambda * lambda);
    let lm2 = re(1.0 / (lambda * lambda));
    let mut h = SuperOperator::new(n);
    h.push(&xs_x * l2, identity(n));
    h.push(identity(n) * l2, xs_x);
    h.push(&x_xs * lm2, identity(n));
    h.push(identity(n) * lm2, x_xs);
    h.push(&xs * re(-2.0), x.clone());
    h.push(x * re(-2.0), xs);
    h
}

/// `Q_X^λ = (λ² − 1)X*X + (λ⁻² − 1)XX*`.
pub fn q_operator(x: &CMatrix, lambda: f64) -> AffiliatedOperator {
    let xs = x.adjoint();
    let l2 = lambda * lambda;
    let q = &xs * x * re(l2 - 1.0) + x * &xs * re(1.0 / l2 - 1.0);
    AffiliatedOperator {
        matrix: linalg::hermitian_part(&q),
        label: format!("Q(lambda = {lambda})"),
    }
}

/// `(λ − λ⁻¹)² X*X + (λ⁻² − 1)[X, X*]`, the commutator form of `Q_X^λ`.
pub fn q_operator_commutator_form(x: &CMatrix, lambda: f64) -> CMatrix {
    let xs = x.adjoint();
    let c = (lambda - 1.0 / lambda).powi(2);
    &xs * x * re(c) + linalg::commutator(x, &xs) * re(1.0 / (lambda * lambda) - 1.0)
}

/// `ξ ↦ Qξ + ξQ`, i.e. `Q + j(Q)` for Hermitian `Q`.
pub fn symmetrized(q: &CMatrix) -> SuperOperator {
    let mut op = SuperOperator::left(q.clone());
    op.push(identity(q.nrows()), q.clone());
    op
}

/// Diagonal of `Q` for `X_m = (A*)^m` at `λ_m`, from the untruncated products
/// `(N+1)...(N+m)` and `N(N-1)...(N-m+1)`.
pub fn ladder_q_profile(m: usize, lambda: f64, dim: usize) -> Vec<f64> {
    let l2 = lambda * lambda;
    (0..dim)
        .map(|k| {
            let rising: f64 = (1..=m).map(|j| (k + j) as f64).product();
            let falling: f64 = (0..m).map(|j| k as f64 - j as f64).product();
            (l2 - 1.0) * rising + (1.0 / l2 - 1.0) * falling
        })
        .collect()
}

/// Eigenvalue `μ` of `Δ₀^{1/2}` carried by `Xξ₀` (Rayleigh quotient) and the
/// relative residual `‖Δ^{1/2}Xξ₀ − μXξ₀‖ / ‖Xξ₀‖`.
pub fn modular_eigenvalue(x: &CMatrix, ctx: &StandardFormContext) -> Result<(f64, f64)> {
    let v = x * ctx.xi0();
    let norm = v.norm();
    if norm == 0.0 {
        return Err(Error::Degenerate("X xi0 vanishes".into()));
    }
    let dv = ctx.modular_power(0.5, &v)?;
    let mu = hs_inner(&v, &dv)?.re / (norm * norm);
    let residual = (&dv - &v.scale(re(mu))).norm() / norm;
    Ok((mu, residual))
}

/// `‖Δ^{1/2}Xξ₀ − μXξ₀‖ <= 1e-12` for a prescribed eigenvalue `μ`.
pub fn modular_eigenvector_check(x: &CMatrix, ctx: &StandardFormContext, eigenvalue: f64) -> Result<Report> {
    let v = x * ctx.xi0();
    let vn = v.norm();
    if vn == 0.0 {
        return Err(Error::Degenerate("X xi0 vanishes".into()));
    }
    let residual = (&ctx.modular_power(0.5, &v)? - &v.scale(re(eigenvalue))).norm();
    Ok(Report::new("modular_eigenvector")
        .param("eigenvalue", eigenvalue)
        .metric("relative_residual", residual / vn)
        .residual(residual, 1e-12))
}

/// Dirichlet generator `H_X^λ`, `λ = √(μ/ν)`.
#[derive(Clone, Debug)]
pub struct DirichletGenerator {
    x: AffiliatedOperator,
    mu: f64,
    nu: f64,
    lambda: f64,
    h: SuperOperator,
    ctx: StandardFormContext,
    norm: OnceLock<f64>,
}

impl DirichletGenerator {
    pub fn new(x: AffiliatedOperator, mu: f64, nu: f64, ctx: &StandardFormContext) -> Result<Self> {
        if !(mu > 0.0 && nu > 0.0 && mu.is_finite() && nu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mu and nu must be positive, got ({mu}, {nu})"
            )));
        }
        if x.dim() != ctx.dim() {
            return Err(Error::DimensionMismatch {
                expected: ctx.dim(),
                found: x.dim(),
            });
        }
        let lambda = (mu / nu).sqrt();
        let h = generator_direct(&x.matrix, lambda);
        Ok(Self {
            x,
            mu,
            nu,
            lambda,
            h,
            ctx: ctx.clone(),
            norm: OnceLock::new(),
        })
    }

    /// `μ = λ`, `ν = λ⁻¹`.
    pub fn with_lambda(x: AffiliatedOperator, lambda: f64, ctx: &StandardFormContext) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
        }
        Self::new(x, lambda, 1.0 / lambda, ctx)
    }

    pub fn x(&self) -> &AffiliatedOperator {
        &self.x
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn h(&self) -> &SuperOperator {
        &self.h
    }

    pub fn ctx(&self) -> &StandardFormContext {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    /// Spectral norm of the dense realization.
    pub fn norm(&self) -> f64 {
        *self.norm.get_or_init(|| linalg::hermitian_norm(self.h.dense()))
    }

    /// `E_X^{μ,ν}[ξ]`; equals `μν·(ξ|Hξ)`.
    pub fn form(&self, xi: &HsVector) -> f64 {
        form_value(&self.x.matrix, self.mu, self.nu, xi)
    }

    /// `‖Hξ₀‖`.
    pub fn kernel_residual(&self) -> f64 {
        self.h.apply(self.ctx.xi0()).norm()
    }

    /// Eager dense realization, so the generator can be shared read-only.
    pub fn realize(&self) -> &Self {
        self.h.dense();
        self.norm();
        self
    }
}

/// Both assemblies agree on the dense realization.
pub fn generator_identity_check(x: &CMatrix, lambda: f64) -> Report {
    let direct = generator_direct(x, lambda);
    let expanded = generator_expanded(x, lambda);
    let scale = expanded.dense().norm();
    let diff = (direct.dense() - expanded.dense()).norm();
    Report::new("generator_identity")
        .param("dim", x.nrows())
        .param("lambda", lambda)
        .metric("norm_h_frobenius", scale)
        .metric("self_adjoint_defect", expanded.self_adjoint_defect())
        .residual(relative(diff, scale), IDENTITY_TOL)
}

/// `H − (|d_X|² + |d_{X*}|²) = (λ²−1)(X*X + j(X*X)) + (λ⁻²−1)(XX* + j(XX*))`.
pub fn coercivity_identity_check(gen: &DirichletGenerator) -> Report {
    let x = &gen.x.matrix;
    let lambda = gen.lambda;
    let lhs = gen.h.minus(&generator_direct(x, 1.0));
    let xs = x.adjoint();
    let a = &xs * x;
    let b = x * &xs;
    let l2 = lambda * lambda;
    let rhs = symmetrized(&a)
        .scaled(re(l2 - 1.0))
        .plus(&symmetrized(&b).scaled(re(1.0 / l2 - 1.0)));
    let scale = gen.h.dense().norm();
    let diff = (lhs.dense() - rhs.dense()).norm();
    Report::new("coercivity_identity")
        .param("dim", gen.dim())
        .param("lambda", lambda)
        .residual(relative(diff, scale), IDENTITY_TOL)
}

/// Minimum eigenvalue of `H − B_{ε,δ}` relative to `‖H‖`, with
/// `B_{ε,δ} = (λ²−ε²)X*X + (λ²−ε⁻²)j(X*X) + (λ⁻²−δ²)XX* + (λ⁻²−δ⁻²)j(XX*)`.
pub fn coercivity_bound_check(gen: &DirichletGenerator, eps: f64, delta: f64) -> Result<Report> {
    if !(eps > 0.0 && delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon and delta must be positive, got ({eps}, {delta})"
        )));
    }
    let x = &gen.x.matrix;
    let xs = x.adjoint();
    let a = &xs * x;
    let b = x * &xs;
    let l2 = gen.lambda.powi(2);
    let lm2 = 1.0 / l2;
    let mut bound = SuperOperator::new(gen.dim());
    bound.push(&a * re(l2 - eps * eps), identity(gen.dim()));
    bound.push(identity(gen.dim()) * re(l2 - 1.0 / (eps * eps)), a);
    bound.push(&b * re(lm2 - delta * delta), identity(gen.dim()));
    bound.push(identity(gen.dim()) * re(lm2 - 1.0 / (delta * delta)), b);
    let min_eig = linalg::min_eigenvalue(gen.h.minus(&bound).dense());
    let scale = gen.norm();
    Ok(Report::new("coercivity_bound")
        .param("lambda", gen.lambda)
        .param("epsilon", eps)
        .param("delta", delta)
        .metric("min_eigenvalue", min_eig)
        .metric("norm_h", scale)
        .residual(relative((-min_eig).max(0.0), scale), PSD_TOL))
}

/// Sorted eigenvalues of `Q + j(Q)` are dominated by those of `H`, and
/// `H − Q − j(Q) ⪰ 0`.
pub fn minmax_domination_check(gen: &DirichletGenerator) -> Report {
    let q = q_operator(&gen.x.matrix, gen.lambda).matrix;
    let qq = symmetrized(&q);
    let eq = linalg::eigvalsh(qq.dense());
    let eh = linalg::eigvalsh(gen.h.dense());
    let worst = eq
        .iter()
        .zip(&eh)
        .map(|(a, b)| a - b)
        .fold(f64::NEG_INFINITY, f64::max);
    let gap_min = linalg::min_eigenvalue(gen.h.minus(&qq).dense());
    let scale = gen.norm();
    let residual = relative(worst.max(0.0), scale).max(relative((-gap_min).max(0.0), scale));
    Report::new("minmax_domination")
        .param("lambda", gen.lambda)
        .param("dim", gen.dim())
        .metric("max_sorted_excess", worst)
        .metric("min_eig_h_minus_q", gap_min)
        .metric("norm_h", scale)
        .residual(residual, PSD_TOL)
}

/// `H` maps Hermitian vectors to Hermitian vectors.
pub fn j_reality_check(gen: &DirichletGenerator, seed: u64, samples: usize) -> Report {
    let mut worst = 0.0_f64;
    for s in 0..samples {
        let xi = sample_hermitian(gen.dim(), sample_seed(seed, s as u64));
        let h = gen.h.apply(&xi).into_matrix();
        worst = worst.max((&h - h.adjoint()).norm());
    }
    let scale = gen.norm().max(1.0);
    Report::new("j_reality")
        .param("samples", samples)
        .metric("max_antihermitian_part", worst)
        .residual(worst / scale, IDENTITY_TOL)
}

/// The form, evaluated as `‖dξ‖²`, against its explicit quadratic expansion on J-real `ξ`.
pub fn form_expansion_check(gen: &DirichletGenerator, seed: u64, samples: usize) -> Report {
    let x = &gen.x.matrix;
    let xs = x.adjoint();
    let l2 = gen.lambda.powi(2);
    let mut worst = 0.0_f64;
    for s in 0..samples {
        let xi = sample_hermitian(gen.dim(), sample_seed(seed, s as u64));
        let m = xi.matrix();
        let j = m.adjoint();
        let via_derivations = form_value(x, gen.lambda, 1.0 / gen.lambda, &xi);
        // JX*Jξ = ξX and JXJξ = ξX*
        let cross = (x * m).dotc(&(m * x)) + (&xs * m).dotc(&(m * &xs));
        let explicit = l2 * ((x * m).norm_squared() + (x * &j).norm_squared())
            + ((&xs * m).norm_squared() + (&xs * &j).norm_squared()) / l2
            - 2.0 * cross.re;
        worst = worst.max((via_derivations - explicit).abs());
    }
    let scale = gen.norm().max(1.0);
    Report::new("form_expansion")
        .param("samples", samples)
        .metric("max_abs_difference", worst)
        .residual(worst / scale, 1e-10)
}

/// `E(ξ₊|ξ₋) <= 0` for Jordan parts of seeded Hermitian vectors.
pub fn beurling_deny_check(gen: &DirichletGenerator, seed: u64, samples: usize) -> Result<Report> {
    let mut worst = f64::NEG_INFINITY;
    for s in 0..samples {
        let xi = sample_hermitian(gen.dim(), sample_seed(seed, s as u64));
        let parts = jordan_decompose(&xi)?;
        let cross = form_pairing(&gen.x.matrix, gen.mu, gen.nu, &parts.plus, &parts.minus);
        worst = worst.max(cross);
    }
    if samples == 0 {
        worst = 0.0;
    }
    Ok(Report::new("beurling_deny")
        .param("samples", samples)
        .metric("max_cross_term", worst)
        .residual(worst.max(0.0), 1e-10))
}

/// Evaluates both sides of "conservative iff `Xξ₀` is a modular eigenvector":
/// (a) `E[ξ₀] <= tol`; (b) `Δ^{1/2}Xξ₀ = (μ/ν)Xξ₀` and `S₀(Xξ₀) = X*ξ₀`.
pub fn conservativeness_check(
    x: &CMatrix,
    mu: f64,
    nu: f64,
    ctx: &StandardFormContext,
) -> Result<Report> {
    const TOL: f64 = 1e-10;
    let xi0 = ctx.xi0();
    let energy = form_value(x, mu, nu, xi0);
    let v = x * xi0;
    let vn = v.norm();
    let (eig_res, tomita_res) = if vn == 0.0 {
        (0.0, 0.0)
    } else {
        let dv = ctx.modular_power(0.5, &v)?;
        let e = (&dv - &v.scale(re(mu / nu))).norm() / vn;
        let t = (&ctx.s0_apply(&v)? - &(&x.adjoint() * xi0)).norm() / vn;
        (e, t)
    };
    let side_a = energy <= TOL;
    let side_b = eig_res <= TOL && tomita_res <= TOL;
    let mut r = Report::new("conservativeness")
        .param("mu", mu)
        .param("nu", nu)
        .metric("form_at_xi0", energy)
        .metric("eigen_residual", eig_res)
        .metric("tomita_residual", tomita_res)
        .metric("agreement", if side_a == side_b { 1.0 } else { 0.0 })
        .residual(energy.max(eig_res).max(tomita_res), TOL);
    if side_a != side_b {
        r = r.note("the two sides of the equivalence disagree").with_status(Status::Fail);
    }
    Ok(r)
}

/// `d_X^λ ∘ i₀ = i₀ ∘ i[X, ·]` together with the left/right factorizations
/// `Δ^{1/4}(Xyξ₀) = λX i₀(y)` and `Δ^{1/4}(yXξ₀) = λ⁻¹ i₀(y) X`.
pub fn intertwining_check(
    x: &CMatrix,
    lambda: f64,
    ctx: &StandardFormContext,
    seed: u64,
    samples: usize,
) -> Result<Report> {
    const TOL: f64 = 1e-10;
    let base = Report::new("intertwining").param("lambda", lambda).param("samples", samples);
    let v = x * ctx.xi0();
    let vn = v.norm();
    let pre = if vn == 0.0 {
        f64::INFINITY
    } else {
        (&ctx.modular_power(0.5, &v)? - &v.scale(re(lambda * lambda))).norm() / vn
    };
    if pre > 1e-8 {
        return Ok(base
            .metric("eigenvector_residual", pre)
            .note("X xi0 is not a modular eigenvector with eigenvalue lambda^2")
            .with_status(Status::NotApplicable));
    }
    let mut r1 = 0.0_f64;
    let mut r2 = 0.0_f64;
    let mut r3 = 0.0_f64;
    for s in 0..samples {
        let y = sample_general(ctx.dim(), sample_seed(seed, s as u64)).into_matrix();
        let iy = ctx.embed(&y)?;
        let lhs = derivation_apply(x, lambda, 1.0 / lambda, &iy);
        let rhs = ctx.embed(&(linalg::commutator(x, &y) * I))?;
        r1 = r1.max((&lhs - &rhs).norm());

        let xy = ctx.modular_power(0.25, &(&(x * &y) * ctx.xi0()))?;
        r2 = r2.max((&xy - &(x * &iy).scale(re(lambda))).norm());

        let yx = ctx.modular_power(0.25, &(&(&y * x) * ctx.xi0()))?;
        let right = HsVector::new(iy.matrix() * x * re(1.0 / lambda));
        r3 = r3.max((&yx - &right).norm());
    }
    Ok(base
        .metric("eigenvector_residual", pre)
        .metric("intertwining_residual", r1)
        .metric("left_factor_residual", r2)
        .metric("right_factor_residual", r3)
        .residual(r1.max(r2).max(r3), TOL))
}

/// Leading growth of `Q` for `X_m = (A*)^m` at `λ_m² = e^{−mβ/2}`: the m-th
/// finite difference of the interior diagonal divided by `m!` equals
/// `(λ_m − λ_m⁻¹)²`, which is compared with `(2 sinh(mβ/4))²`.
pub fn q_leading_coefficient_check(spec: &crate::fock::FockSpec, m: usize) -> Result<Report> {
    let x = crate::fock::ladder_power(spec, m)?;
    let lambda = (-(m as f64) * spec.beta / 4.0).exp();
    let q = q_operator(&x.matrix, lambda).matrix;
    let diag = linalg::real_diagonal(&q);
    let interior = spec.dim - m;
    if interior < m + 2 {
        return Err(Error::InvalidParameter(format!(
            "dim = {} too small to resolve degree-{m} growth",
            spec.dim
        )));
    }
    let mut diffs: Vec<f64> = diag[..interior].to_vec();
    for _ in 0..m {
        diffs = diffs.windows(2).map(|w| w[1] - w[0]).collect();
    }
    let factorial: f64 = (1..=m).map(|j| j as f64).product();
    let expected = (2.0 * (m as f64 * spec.beta / 4.0).sinh()).powi(2);
    let via_lambda = (lambda - 1.0 / lambda).powi(2);
    let worst = diffs
        .iter()
        .map(|d| (d / factorial - expected).abs())
        .fold(0.0, f64::max);
    let alt = (q_operator_commutator_form(&x.matrix, lambda) - &q).norm();
    let profile = ladder_q_profile(m, lambda, spec.dim);
    let profile_res = (0..interior)
        .map(|k| (profile[k] - diag[k]).abs())
        .fold(0.0, f64::max);
    Ok(Report::new("q_leading_coefficient")
        .param("m", m)
        .param("beta", spec.beta)
        .metric("expected_coefficient", expected)
        .metric("lambda_form_coefficient", via_lambda)
        .metric("commutator_form_residual", alt)
        .metric("interior_profile_residual", profile_res)
        .boundary(crate::fock::boundary_indices(spec.dim, m))
        .residual(worst.max((via_lambda - expected).abs()), 1e-10)
        .require(alt <= 1e-12 * (spec.dim as f64).powi(m as i32) && profile_res <= 1e-9))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{ladder_power, FockSpec};
    use crate::linalg::{complex_gaussian, rng};

    fn ctx(dim: usize, beta: f64) -> StandardFormContext {
        StandardFormContext::from_spec(&FockSpec::linear(dim, beta).unwrap()).unwrap()
    }

    fn ou_generator(dim: usize, beta: f64, m: usize) -> DirichletGenerator {
        let spec = FockSpec::linear(dim, beta).unwrap();
        let c = StandardFormContext::from_spec(&spec).unwrap();
        let x = ladder_power(&spec, m).unwrap();
        DirichletGenerator::with_lambda(x, (-(m as f64) * beta / 4.0).exp(), &c).unwrap()
    }

    #[test]
    fn derivation_basics() {
        let xi = sample_general(6, 1);
        assert!(derivation_apply(&identity(6), 1.0, 1.0, &xi).norm() < 1e-15);
        let x = complex_gaussian(6, &mut rng(2));
        let d1 = derivation_apply(&x, 0.4, 1.3, &xi);
        let d3 = derivation_apply(&x, 1.2, 3.9, &xi);
        assert!((&d3 - &d1.scale(re(3.0))).norm() < 1e-14);
        assert!((&derivation(&x, 0.4, 1.3).apply(&xi) - &d1).norm() < 1e-14);

        let beta = 1.0;
        let spec = FockSpec::linear(10, beta).unwrap();
        let c = StandardFormContext::from_spec(&spec).unwrap();
        let adag = ladder_power(&spec, 1).unwrap().matrix;
        let d = derivation_apply(&adag, (-beta / 2.0).exp(), 1.0, c.xi0());
        assert!(d.norm() < 1e-12);
    }

    #[test]
    fn form_scaling_identity() {
        let x = complex_gaussian(5, &mut rng(4));
        for s in 0..10 {
            let xi = sample_general(5, s);
            let (mu, nu) = (0.7, 2.3);
            let lambda = (mu / nu as f64).sqrt();
            let lhs = form_value(&x, mu, nu, &xi);
            let rhs = mu * nu * form_value(&x, lambda, 1.0 / lambda, &xi);
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
            assert!(lhs >= 0.0);
            assert!(form_value(&identity(5), 1.3, 1.3, &xi) < 1e-25);
        }
    }

    #[test]
    fn form_equals_quadratic_form_of_generator() {
        let c = ctx(5, 0.8);
        let x = AffiliatedOperator::custom(complex_gaussian(5, &mut rng(6))).unwrap();
        let g = DirichletGenerator::new(x, 0.5, 1.7, &c).unwrap();
        let xi = sample_general(5, 7);
        let q = hs_inner(&xi, &g.h().apply(&xi)).unwrap();
        assert!(q.im.abs() < 1e-12);
        assert!((g.form(&xi) - g.mu() * g.nu() * q.re).abs() < 1e-11);
    }

    #[test]
    fn assemblies_agree_on_random_operators() {
        for s in 0..5 {
            let x = complex_gaussian(8, &mut rng(100 + s));
            let r = generator_identity_check(&x, 2.0);
            assert!(r.pass, "{r:?}");
            assert!(r.metrics["self_adjoint_defect"] < 1e-13);
        }
    }

    #[test]
    fn ou_generator_annihilates_xi0() {
        let g = ou_generator(12, 1.0, 1);
        assert!(g.kernel_residual() < 1e-11);
        let e = generator_expanded(&g.x().matrix, g.lambda());
        assert!(e.apply(g.ctx().xi0()).norm() < 1e-11);
    }

    #[test]
    fn hermitian_x_at_unit_lambda_is_double_commutator() {
        let x = linalg::hermitian_part(&complex_gaussian(5, &mut rng(9)));
        let h = generator_expanded(&x, 1.0);
        let xi = sample_general(5, 3);
        let m = xi.matrix();
        let dc = linalg::commutator(&x, &linalg::commutator(&x, m));
        assert!((h.apply(&xi).matrix() - &dc * re(2.0)).norm() < 1e-12 * (1.0 + dc.norm()));
    }

    #[test]
    fn generator_is_psd() {
        let c = ctx(6, 1.0);
        let x = AffiliatedOperator::custom(complex_gaussian(6, &mut rng(1))).unwrap();
        let g = DirichletGenerator::with_lambda(x, 0.6, &c).unwrap();
        let min = linalg::min_eigenvalue(g.h().dense());
        assert!(min >= -PSD_TOL * g.norm());
    }

    #[test]
    fn q_operator_forms() {
        let x = complex_gaussian(6, &mut rng(12));
        assert!(q_operator(&x, 1.0).matrix.norm() < 1e-14);
        let q = q_operator(&x, 1.7).matrix;
        assert!((q_operator_commutator_form(&x, 1.7) - &q).norm() < 1e-12 * q.norm());
        assert!(linalg::hermitian_defect(&q) == 0.0);
    }

    #[test]
    fn q_coefficient_matches_sinh() {
        let lambda = (-0.25f64).exp();
        let c = (lambda - 1.0 / lambda).powi(2);
        assert!((c - 0.2552519).abs() < 1e-7);
        let spec = FockSpec::linear(16, 1.0).unwrap();
        let r = q_leading_coefficient_check(&spec, 1).unwrap();
        assert!(r.pass, "{r:?}");
        let r2 = q_leading_coefficient_check(&spec, 2).unwrap();
        assert!(r2.pass, "{r2:?}");
    }

    #[test]
    fn q_growth_on_ladder_powers() {
        let spec = FockSpec::linear(40, 0.7).unwrap();
        for m in 1..=3 {
            let lambda = (-(m as f64) * 0.7 / 4.0).exp();
            let x = ladder_power(&spec, m).unwrap();
            let q = q_operator(&x.matrix, lambda).matrix;
            let lead = (lambda - 1.0 / lambda).powi(2);
            let k = 40 - m - 1;
            let ratio = q[(k, k)].re / (lead * (k as f64).powi(m as i32));
            assert!(ratio > 0.6 && ratio < 1.6, "m = {m}, ratio = {ratio}");
        }
    }

    #[test]
    fn coercivity_identity_examples() {
        let c = ctx(6, 1.0);
        let x = AffiliatedOperator::custom(complex_gaussian(6, &mut rng(31))).unwrap();
        let g = DirichletGenerator::with_lambda(x.clone(), 3.0, &c).unwrap();
        assert!(coercivity_identity_check(&g).pass);
        let g1 = DirichletGenerator::with_lambda(x, 1.0, &c).unwrap();
        let r = coercivity_identity_check(&g1);
        assert!(r.pass && r.residual < 1e-14);
        let ou = ou_generator(12, 1.0, 1);
        assert!(coercivity_identity_check(&ou).pass);
    }

    #[test]
    fn coercivity_bound_at_unit_parameters() {
        let ou = ou_generator(10, 1.0, 1);
        let r = coercivity_bound_check(&ou, 1.0, 1.0).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(coercivity_bound_check(&ou, 0.0, 1.0).is_err());
        let l = ou.lambda();
        assert!(coercivity_bound_check(&ou, l, 1.0 / l).unwrap().pass);
        assert!(coercivity_bound_check(&ou, 2.0, 0.5).unwrap().pass);
        let c = ctx(4, 1.0);
        let id = AffiliatedOperator::custom(identity(4)).unwrap();
        let g = DirichletGenerator::with_lambda(id, 1.0, &c).unwrap();
        assert!(g.norm() < 1e-14);
        assert!(coercivity_bound_check(&g, 1.0, 1.0).unwrap().pass);
    }

    #[test]
    fn coercivity_bound_with_equal_parameters_on_random_x() {
        let c = ctx(5, 1.0);
        for s in 0..5 {
            let x = AffiliatedOperator::custom(complex_gaussian(5, &mut rng(40 + s))).unwrap();
            let g = DirichletGenerator::with_lambda(x, 0.7, &c).unwrap();
            for e in [0.3, 1.0, 2.5] {
                assert!(coercivity_bound_check(&g, e, e).unwrap().pass);
            }
        }
    }

    #[test]
    fn minmax_domination_on_ou() {
        let r = minmax_domination_check(&ou_generator(8, 1.0, 1));
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn beurling_deny_examples() {
        let ou = ou_generator(8, 1.0, 1);
        let r = beurling_deny_check(&ou, 5, 100).unwrap();
        assert!(r.pass, "{r:?}");
        // positive vector: ξ₋ = 0
        let p = crate::standard_form::sample_positive(8, 3);
        let parts = jordan_decompose(&p).unwrap();
        assert!(parts.minus.norm() < 1e-12);
        // diagonal vectors
        let d = HsVector::new(linalg::diag_real(&[1.0, -2.0, 0.5, -0.1, 3.0, -1.0, 0.2, -0.7]));
        let parts = jordan_decompose(&d).unwrap();
        let cross = form_pairing(&ou.x().matrix, ou.mu(), ou.nu(), &parts.plus, &parts.minus);
        assert!(cross <= 0.0);
    }

    #[test]
    fn j_reality_and_form_expansion() {
        let c = ctx(6, 1.0);
        let x = AffiliatedOperator::custom(complex_gaussian(6, &mut rng(77))).unwrap();
        let g = DirichletGenerator::with_lambda(x, 1.4, &c).unwrap();
        assert!(j_reality_check(&g, 1, 20).pass);
        assert!(form_expansion_check(&g, 2, 20).pass);
    }

    #[test]
    fn conservativeness_iff_both_directions() {
        let beta = 1.0;
        let spec = FockSpec::linear(12, beta).unwrap();
        let c = StandardFormContext::from_spec(&spec).unwrap();
        for m in 1..=2 {
            let x = ladder_power(&spec, m).unwrap().matrix;
            let ratio = (-(m as f64) * beta / 2.0).exp();
            let r = conservativeness_check(&x, ratio, 1.0, &c).unwrap();
            assert!(r.pass, "{r:?}");
        }
        let x = ladder_power(&spec, 1).unwrap().matrix;
        let r = conservativeness_check(&x, 1.0, 1.0, &c).unwrap();
        assert!(!r.pass);
        assert_eq!(r.metrics["agreement"], 1.0);
        assert!(r.metrics["form_at_xi0"] > 1e-3);
        let r = conservativeness_check(&identity(12), 2.0, 2.0, &c).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn modular_eigenvalue_of_ladder_powers() {
        let beta = 1.0;
        let spec = FockSpec::linear(32, beta).unwrap();
        let c = StandardFormContext::from_spec(&spec).unwrap();
        for m in 1..=3 {
            let x = ladder_power(&spec, m).unwrap().matrix;
            let (mu, res) = modular_eigenvalue(&x, &c).unwrap();
            assert!((mu - (-(m as f64) * beta / 2.0).exp()).abs() < 1e-14);
            assert!(res < 1e-13);
        }
    }

    #[test]
    fn modular_eigenvector_report() {
        let spec = FockSpec::linear(32, 1.0).unwrap();
        let c = StandardFormContext::from_spec(&spec).unwrap();
        for m in 1..=3 {
            let x = ladder_power(&spec, m).unwrap().matrix;
            let r = modular_eigenvector_check(&x, &c, (-(m as f64) / 2.0).exp()).unwrap();
            assert!(r.pass, "{r:?}");
        }
        let x = ladder_power(&spec, 1).unwrap().matrix;
        assert!(!modular_eigenvector_check(&x, &c, 0.5).unwrap().pass);
    }

    #[test]
    fn intertwining_examples() {
        let beta = 1.0;
        let spec = FockSpec::linear(10, beta).unwrap();
        let c = StandardFormContext::from_spec(&spec).unwrap();
        let x = ladder_power(&spec, 1).unwrap().matrix;
        let lambda = (-beta / 4.0).exp();
        let r = intertwining_check(&x, lambda, &c, 3, 20).unwrap();
        assert!(r.pass, "{r:?}");
        let x2 = ladder_power(&spec, 2).unwrap().matrix;
        let r = intertwining_check(&x2, (-beta / 2.0).exp(), &c, 3, 20).unwrap();
        assert!(r.pass, "{r:?}");
        // y = I: commutator vanishes and d(ξ₀) = 0
        let d = derivation_apply(&x, lambda, 1.0 / lambda, c.xi0());
        assert!(d.norm() < 1e-14);
        // hypotheses unmet
        let r = intertwining_check(&x, 1.0, &c, 3, 5).unwrap();
        assert_eq!(r.status, Status::NotApplicable);
    }
}
