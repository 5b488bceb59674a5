//! Deformed annihilators `X = ∫ e^{−itβg(N)} A e^{itβg(N)} f(t) dt`.
//!
//! Two independent constructions are provided: direct quadrature of the
//! conjugated annihilator, and the functional-calculus form
//! `X = A f̂(β k(N))` with `k(n) = g(n) − g(n−1)` and `f̂(s) = ∫ f(t) e^{ist} dt`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ladder, AffiliatedOperator, FockSpec};
use crate::linalg::{self, re, CMatrix, C64, ZERO};
use crate::report::Report;
use crate::standard_form::StandardFormContext;

/// Frequency of the hyperbolic profile, `a = 8π`.
pub const COSH_RATE: f64 = 8.0 * PI;
/// Largest tolerated estimate of the neglected tails `|t| > T`.
pub const TAIL_TOL: f64 = 1e-10;

/// Profile `f` of the deformation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FunctionSpec {
    /// `f(t) = e^{ibt} / cosh(8πt)`.
    Cosh { b: f64 },
    /// `f(t) = e^{ibt} / ln(e − 1 + cosh(8πt))^r`.
    Logcosh { b: f64, r: f64 },
    /// Samples of `f` on an increasing grid, linearly interpolated, zero outside.
    Table { times: Vec<f64>, re: Vec<f64>, im: Vec<f64> },
}

impl FunctionSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            FunctionSpec::Cosh { b } if !b.is_finite() => {
                Err(Error::InvalidParameter(format!("b must be finite, got {b}")))
            }
            FunctionSpec::Logcosh { r, .. } if *r == 1.0 => Err(Error::OutOfScope(
                "logcosh with r = 1 is not integrable; only the weak interpretation exists".into(),
            )),
            FunctionSpec::Logcosh { b, r } if !(*r > 1.0 && r.is_finite() && b.is_finite()) => Err(
                Error::InvalidParameter(format!("logcosh needs finite b and r > 1, got b = {b}, r = {r}")),
            ),
            FunctionSpec::Table { times, re, im } => {
                if times.len() < 2 || times.len() != re.len() || times.len() != im.len() {
                    return Err(Error::InvalidParameter(
                        "table needs at least two samples and matching lengths".into(),
                    ));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidParameter("table times must increase".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, t: f64) -> C64 {
        match self {
            FunctionSpec::Cosh { b } => C64::from_polar(1.0 / (COSH_RATE * t).cosh(), b * t),
            FunctionSpec::Logcosh { b, r } => {
                let base = logcosh_base(t);
                C64::from_polar(base.powf(-r), b * t)
            }
            FunctionSpec::Table { times, re, im } => {
                if t < times[0] || t > times[times.len() - 1] {
                    return ZERO;
                }
                let i = times.partition_point(|&x| x <= t).clamp(1, times.len() - 1);
                let (t0, t1) = (times[i - 1], times[i]);
                let u = (t - t0) / (t1 - t0);
                C64::new(re[i - 1] + u * (re[i] - re[i - 1]), im[i - 1] + u * (im[i] - im[i - 1]))
            }
        }
    }

    /// Modular eigenvalue attached to the analytic families, `e^{−b/4}`.
    pub fn lambda_target(&self) -> Option<f64> {
        match self {
            FunctionSpec::Cosh { b } | FunctionSpec::Logcosh { b, .. } => Some((-b / 4.0).exp()),
            FunctionSpec::Table { .. } => None,
        }
    }

    /// `f̂(s) = 1 / (8 cosh((s + b)/16))` for the cosh family.
    pub fn closed_form_hat(&self, s: f64) -> Option<C64> {
        match self {
            FunctionSpec::Cosh { b } => Some(re(1.0 / (8.0 * ((s + b) / 16.0).cosh()))),
            _ => None,
        }
    }

    /// Upper estimate of `∫_{|t|>T} |f|`.
    pub fn tail_estimate(&self, half_width: f64) -> f64 {
        match self {
            // |f| <= 2 e^{-8π|t|}
            FunctionSpec::Cosh { .. } => 4.0 * (-COSH_RATE * half_width).exp() / COSH_RATE,
            // |f| decays like |t|^{-r}
            FunctionSpec::Logcosh { r, .. } => {
                2.0 * half_width * self.eval(half_width).norm() / (r - 1.0)
            }
            FunctionSpec::Table { times, .. } => {
                if times[0] < -half_width || times[times.len() - 1] > half_width {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
        }
    }
}

/// `ln(e − 1 + cosh(x))` without overflow for large `|x|`.
fn logcosh_base(t: f64) -> f64 {
    let x = (COSH_RATE * t).abs();
    if x < 30.0 {
        (std::f64::consts::E - 1.0 + x.cosh()).ln()
    } else {
        // cosh x = e^x (1 + e^{-2x}) / 2
        x - std::f64::consts::LN_2 + ((std::f64::consts::E - 1.0) * 2.0 * (-x).exp() + (-2.0 * x).exp()).ln_1p()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureRule {
    Trapezoid,
    Gauss,
}

/// Quadrature on `[−T, T]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_rule")]
    pub rule: QuadratureRule,
}

fn default_half_width() -> f64 {
    2.0
}

fn default_nodes() -> usize {
    4096
}

fn default_rule() -> QuadratureRule {
    QuadratureRule::Trapezoid
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            half_width: default_half_width(),
            nodes: default_nodes(),
            rule: default_rule(),
        }
    }
}

impl QuadratureSpec {
    pub fn new(half_width: f64, nodes: usize, rule: QuadratureRule) -> Result<Self> {
        let q = Self {
            half_width,
            nodes,
            rule,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "half width must be positive, got {}",
                self.half_width
            )));
        }
        if self.nodes < 64 {
            return Err(Error::InvalidParameter(format!(
                "at least 64 quadrature nodes required, got {}",
                self.nodes
            )));
        }
        Ok(())
    }

    /// Nodes and weights on `[−T, T]`.
    pub fn rule_points(&self) -> (Vec<f64>, Vec<f64>) {
        let t = self.half_width;
        match self.rule {
            QuadratureRule::Trapezoid => {
                let n = self.nodes;
                let h = 2.0 * t / (n - 1) as f64;
                let x = (0..n).map(|i| -t + h * i as f64).collect();
                let w = (0..n)
                    .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
                    .collect();
                (x, w)
            }
            QuadratureRule::Gauss => {
                let (x, w) = gauss_legendre(self.nodes);
                (
                    x.into_iter().map(|x| x * t).collect(),
                    w.into_iter().map(|w| w * t).collect(),
                )
            }
        }
    }

    fn ensure_tail(&self, f: &FunctionSpec) -> Result<()> {
        let tail = f.tail_estimate(self.half_width);
        if tail > TAIL_TOL {
            return Err(Error::Quadrature(format!(
                "tail beyond |t| = {} estimated at {tail:.3e}; increase the half width",
                self.half_width
            )));
        }
        Ok(())
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let step = p1 / dp;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    (x, w)
}

/// `f̂(s) = ∫ f(t) e^{ist} dt` by quadrature.
pub fn fourier_hat(f: &FunctionSpec, s: f64, quad: &QuadratureSpec) -> Result<C64> {
    f.validate()?;
    quad.validate()?;
    quad.ensure_tail(f)?;
    let (x, w) = quad.rule_points();
    Ok(transform_on(f, s, &x, &w))
}

fn transform_on(f: &FunctionSpec, s: f64, x: &[f64], w: &[f64]) -> C64 {
    x.iter()
        .zip(w)
        .map(|(t, wt)| f.eval(*t) * C64::from_polar(*wt, s * t))
        .sum()
}

/// `f̂`, using the closed form when one exists.
pub fn hat(f: &FunctionSpec, s: f64, quad: &QuadratureSpec) -> Result<C64> {
    match f.closed_form_hat(s) {
        Some(v) => Ok(v),
        None => fourier_hat(f, s, quad),
    }
}

/// `k(n) = g(n) − g(n−1)` with `g(−1) := g(0)`.
pub fn gaps(spec: &FockSpec) -> Vec<f64> {
    (0..spec.dim).map(|n| spec.gap(n).unwrap_or(0.0)).collect()
}

/// `f̂(β k(n))` for `n < dim`.
pub fn hat_profile(f: &FunctionSpec, spec: &FockSpec, quad: &QuadratureSpec) -> Result<Vec<C64>> {
    let gaps = gaps(spec);
    if f.closed_form_hat(0.0).is_some() {
        return gaps.into_iter().map(|k| hat(f, spec.beta * k, quad)).collect();
    }
    f.validate()?;
    quad.validate()?;
    quad.ensure_tail(f)?;
    let (x, w) = quad.rule_points();
    Ok(gaps
        .into_iter()
        .map(|k| transform_on(f, spec.beta * k, &x, &w))
        .collect())
}

/// `X = A f̂(β k(N))`: `X e_n = f̂(β k(n)) √n e_{n−1}`.
pub fn deformed_operator(
    f: &FunctionSpec,
    spec: &FockSpec,
    quad: &QuadratureSpec,
) -> Result<AffiliatedOperator> {
    f.validate()?;
    let (a, _) = ladder(spec)?;
    let profile = hat_profile(f, spec, quad)?;
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(profile));
    AffiliatedOperator::new(a.matrix * d, "deformed annihilator")
}

/// `Σ_i w_i f(t_i) e^{−it_iβg(N)} A e^{it_iβg(N)}`, entry by entry.
pub fn quadrature_operator(
    f: &FunctionSpec,
    spec: &FockSpec,
    quad: &QuadratureSpec,
) -> Result<AffiliatedOperator> {
    f.validate()?;
    quad.validate()?;
    quad.ensure_tail(f)?;
    let (a, _) = ladder(spec)?;
    let a = a.matrix;
    let energies = spec.energies();
    let (x, w) = quad.rule_points();
    let dim = spec.dim;
    let mut out = CMatrix::zeros(dim, dim);
    for (t, wt) in x.iter().zip(&w) {
        let c = f.eval(*t) * wt;
        if c == ZERO {
            continue;
        }
        for k in 0..dim {
            for j in 0..dim {
                let ajk = a[(j, k)];
                if ajk != ZERO {
                    let phase = C64::from_polar(1.0, t * spec.beta * (energies[k] - energies[j]));
                    out[(j, k)] += c * ajk * phase;
                }
            }
        }
    }
    AffiliatedOperator::new(out, "deformed annihilator (quadrature)")
}

/// Quadrature and functional-calculus constructions agree, and for the cosh
/// family the quadrature transform matches the closed form at seeded points.
pub fn deformation_crosscheck(
    f: &FunctionSpec,
    spec: &FockSpec,
    quad: &QuadratureSpec,
    seed: u64,
    points: usize,
    tol: f64,
) -> Result<Report> {
    let closed = deformed_operator(f, spec, quad)?;
    let numeric = quadrature_operator(f, spec, quad)?;
    let op_res = (&closed.matrix - &numeric.matrix).norm();
    let mut report = Report::new("deformation_crosscheck")
        .param("function", serde_json::to_value(f).unwrap_or_default())
        .param("nodes", quad.nodes)
        .param("half_width", quad.half_width)
        .param("dim", spec.dim)
        .metric("operator_residual", op_res);
    let mut worst_rel = 0.0_f64;
    if f.closed_form_hat(0.0).is_some() {
        let mut rng = linalg::rng(seed);
        for _ in 0..points {
            let s = rng.random_range(-40.0..40.0);
            let exact = f.closed_form_hat(s).expect("closed form");
            let approx = fourier_hat(f, s, quad)?;
            worst_rel = worst_rel.max((approx - exact).norm() / exact.norm());
        }
        report = report.metric("transform_relative_error", worst_rel).param("points", points);
    }
    Ok(report.residual(op_res.max(worst_rel), tol))
}

/// `‖Δ^{1/4}Xξ₀ − λXξ₀‖ / ‖Xξ₀‖ <= tol`.
pub fn modular_eigenvector_check(
    x: &CMatrix,
    ctx: &StandardFormContext,
    lambda: f64,
    tol: f64,
) -> Result<Report> {
    let v = x * ctx.xi0();
    let vn = v.norm();
    if vn == 0.0 {
        return Err(Error::Degenerate("X xi0 vanishes".into()));
    }
    let dv = ctx.modular_power(0.25, &v)?;
    let residual = (&dv - &v.scale(re(lambda))).norm() / vn;
    let rayleigh = crate::standard_form::hs_inner(&v, &dv)?.re / (vn * vn);
    let best = (&dv - &v.scale(re(rayleigh))).norm() / vn;
    Ok(Report::new("deformed_eigenvector")
        .param("lambda", lambda)
        .metric("rayleigh_quotient", rayleigh)
        .metric("best_fit_residual", best)
        .residual(residual, tol))
}

/// `X*X = |f̂(βk(N))|² N`, `XX* = |f̂(βk(N+1))|² (N+1)` and their difference,
/// on interior indices. `profile[n] = f̂(β k(n))`.
pub fn ccr_relations_check(x: &CMatrix, profile: &[C64]) -> Result<Report> {
    let dim = x.nrows();
    if profile.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: profile.len(),
        });
    }
    let xs = x.adjoint();
    let lower = &xs * x;
    let upper = x * &xs;
    let comm = &upper - &lower;
    let a2 = |n: usize| profile[n].norm_sqr() * n as f64;
    let interior = dim - 1;
    let mut r = [0.0_f64; 3];
    let mut scale = 1.0_f64;
    for j in 0..dim {
        for k in 0..dim {
            let d = j == k;
            let want_lower = if d { a2(j) } else { 0.0 };
            r[0] = r[0].max((lower[(j, k)] - re(want_lower)).norm());
            scale = scale.max(want_lower);
            if j < interior && k < interior {
                let want_upper = if d { a2(j + 1) } else { 0.0 };
                r[1] = r[1].max((upper[(j, k)] - re(want_upper)).norm());
                let want_comm = if d { a2(j + 1) - a2(j) } else { 0.0 };
                r[2] = r[2].max((comm[(j, k)] - re(want_comm)).norm());
            }
        }
    }
    Ok(Report::new("deformed_ccr")
        .param("dim", dim)
        .metric("lower_residual", r[0])
        .metric("upper_residual", r[1])
        .metric("commutator_residual", r[2])
        .boundary(vec![dim - 1])
        .residual(r[0].max(r[1]).max(r[2]) / scale, 1e-12))
}

/// `[A², (A*)²] e_k = (2 + 4k) e_k` for `k <= dim − 3`.
pub fn hyperbolic_commutator_check(spec: &FockSpec) -> Result<Report> {
    if spec.dim < 5 {
        return Err(Error::InvalidParameter(format!(
            "hyperbolic commutator needs dim >= 5, got {}",
            spec.dim
        )));
    }
    let (a, _) = ladder(spec)?;
    let x = &a.matrix * &a.matrix;
    let c = linalg::commutator(&x, &x.adjoint());
    let interior = spec.dim - 2;
    let mut worst = 0.0_f64;
    for j in 0..interior {
        for k in 0..interior {
            let want = if j == k { 2.0 + 4.0 * k as f64 } else { 0.0 };
            worst = worst.max((c[(j, k)] - re(want)).norm());
        }
    }
    Ok(Report::new("hyperbolic_commutator")
        .param("dim", spec.dim)
        .boundary(crate::fock::boundary_indices(spec.dim, 2))
        .residual(worst, 1e-12))
}

/// `(X*X)_{kk} / k` for `k >= 1`.
pub fn growth_ratios(x: &CMatrix) -> Vec<f64> {
    let d = x.adjoint() * x;
    (1..x.nrows()).map(|k| d[(k, k)].re / k as f64).collect()
}
