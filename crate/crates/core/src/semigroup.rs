//! Spectral semigroups `T_t = e^{−tH}` on Hilbert–Schmidt space and the
//! checks built on them: Markovianity, complete positivity, the semigroup
//! law, superboundedness, eigenvalue counting and heat traces.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::dirichlet::{ladder_q_profile, q_operator, symmetrized, DirichletGenerator};
use crate::error::{Error, Result};
use crate::linalg::{self, re, sample_seed, CMatrix};
use crate::report::Report;
use crate::standard_form::{
    sample_hermitian, sample_order_interval, sample_positive, HsVector, StandardFormContext,
};
use crate::superop::SuperOperator;

/// Relative slack allowed in the superboundedness inequality.
pub const SUPERBOUND_TOL: f64 = 1e-8;
/// Floor for eigenvalues that must be nonnegative.
pub const FLOOR_TOL: f64 = 1e-9;

/// Eigen-decomposition of a self-adjoint superoperator.
#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns in the column-stacked realization.
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    pub fn of(dense: &CMatrix) -> Self {
        let (eigenvalues, eigenvectors) = linalg::eigh(dense);
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `#{eigenvalues <= λ}`.
    pub fn counting(&self, lambda: f64) -> usize {
        self.eigenvalues.partition_point(|&e| e <= lambda)
    }

    /// `‖V diag(e) V* − H‖_F / ‖H‖_F`.
    pub fn reconstruction_residual(&self, dense: &CMatrix) -> f64 {
        let rebuilt = self.function(|e| e);
        let scale = dense.norm();
        let diff = (rebuilt - dense).norm();
        if scale > 0.0 {
            diff / scale
        } else {
            diff
        }
    }

    /// `φ(H)` as a dense matrix.
    pub fn function(&self, phi: impl Fn(f64) -> f64) -> CMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (j, e) in self.eigenvalues.iter().enumerate() {
            let f = re(phi(*e));
            scaled.column_mut(j).scale_mut(f.re);
        }
        scaled * self.eigenvectors.adjoint()
    }

    /// `(λ, n(λ))` at each eigenvalue, with repeated eigenvalues collapsed.
    pub fn counting_table(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for (i, e) in self.eigenvalues.iter().enumerate() {
            match out.last_mut() {
                Some(last) if last.0 == *e => last.1 = i + 1,
                _ => out.push((*e, i + 1)),
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
enum Structure {
    General,
    /// `G₀ξ = H₀ξ + ξH₀`, with the eigen-decomposition of `H₀`.
    Sandwich { values: Vec<f64>, vectors: CMatrix },
}

/// `T_t = e^{−tH}` for a self-adjoint positive `H` on Hilbert–Schmidt space.
#[derive(Clone, Debug)]
pub struct SemigroupHandle {
    generator: SuperOperator,
    structure: Structure,
    spectrum: OnceLock<Spectrum>,
    label: String,
}

impl SemigroupHandle {
    pub fn from_dirichlet(gen: &DirichletGenerator) -> Self {
        Self::from_superoperator(gen.h().clone(), format!("H(lambda = {})", gen.lambda()))
    }

    /// `G₀ξ = H₀ξ + ξH₀`, so that `T_tξ = e^{−tH₀} ξ e^{−tH₀}`.
    pub fn from_h0(h0: &CMatrix) -> Result<Self> {
        let defect = linalg::hermitian_defect(h0);
        if defect > 1e-10 * h0.norm().max(1.0) {
            return Err(Error::NotHermitian(defect));
        }
        let h0 = linalg::hermitian_part(h0);
        let (values, vectors) = linalg::eigh(&h0);
        Ok(Self {
            generator: symmetrized(&h0),
            structure: Structure::Sandwich { values, vectors },
            spectrum: OnceLock::new(),
            label: "G0".into(),
        })
    }

    pub fn from_superoperator(generator: SuperOperator, label: impl Into<String>) -> Self {
        Self {
            generator,
            structure: Structure::General,
            spectrum: OnceLock::new(),
            label: label.into(),
        }
    }

    pub fn generator(&self) -> &SuperOperator {
        &self.generator
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    /// Eigenvalues of `H₀` when the handle was built from one.
    pub fn h0_eigenvalues(&self) -> Option<&[f64]> {
        match &self.structure {
            Structure::Sandwich { values, .. } => Some(values),
            Structure::General => None,
        }
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum
            .get_or_init(|| Spectrum::of(self.generator.dense()))
    }

    fn check_time(t: f64) -> Result<()> {
        if t >= 0.0 && t.is_finite() {
            Ok(())
        } else {
            Err(Error::NegativeTime(t))
        }
    }

    /// `T_tξ`; sandwich generators use `e^{−tH₀} ξ e^{−tH₀}` directly.
    pub fn evolve(&self, t: f64, xi: &HsVector) -> Result<HsVector> {
        Self::check_time(t)?;
        match &self.structure {
            Structure::Sandwich { values, vectors } => {
                let decay: Vec<f64> = values.iter().map(|v| (-t * v).exp()).collect();
                let e = vectors * linalg::diag_real(&decay) * vectors.adjoint();
                Ok(HsVector::new(&e * xi.matrix() * &e))
            }
            Structure::General => self.evolve_spectral(t, xi),
        }
    }

    /// `T_tξ` through the eigen-decomposition of the dense realization.
    pub fn evolve_spectral(&self, t: f64, xi: &HsVector) -> Result<HsVector> {
        Self::check_time(t)?;
        if xi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: xi.dim(),
            });
        }
        let sp = self.spectrum();
        let v = linalg::vectorize(xi.matrix());
        let mut coeffs = sp.eigenvectors.adjoint() * v;
        for (c, e) in coeffs.iter_mut().zip(&sp.eigenvalues) {
            *c *= (-t * e).exp();
        }
        Ok(HsVector::new(linalg::unvectorize(
            &(&sp.eigenvectors * coeffs),
            self.dim(),
        )))
    }

    /// Dense `e^{−tH}`.
    pub fn propagator(&self, t: f64) -> Result<CMatrix> {
        Self::check_time(t)?;
        Ok(self.spectrum().function(|e| (-t * e).exp()))
    }

    /// `Tr e^{−tH}`.
    pub fn heat_trace(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("heat trace needs t > 0, got {t}")));
        }
        Ok(self.spectrum().eigenvalues.iter().map(|e| (-t * e).exp()).sum())
    }

    /// Whether `ξ₀` is annihilated by the generator, relative to its norm.
    pub fn fixes(&self, xi0: &HsVector) -> bool {
        let scale = linalg::hermitian_norm(self.generator.dense()).max(1.0);
        self.generator.apply(xi0).norm() <= 1e-9 * scale
    }
}

/// Choi matrix `C[(p,j),(q,k)] = Φ(E_pq)_{jk}` of a dense superoperator.
pub fn choi_matrix(dense: &CMatrix, dim: usize) -> CMatrix {
    let idx = |r: usize, c: usize| r + dim * c;
    CMatrix::from_fn(dim * dim, dim * dim, |a, b| {
        let (p, j) = (a / dim, a % dim);
        let (q, k) = (b / dim, b % dim);
        dense[(idx(j, k), idx(p, q))]
    })
}

/// `T_{s+t} = T_sT_t`, contractivity and continuity at small times.
pub fn semigroup_law_check(
    handle: &SemigroupHandle,
    times: &[f64],
    seed: u64,
    samples: usize,
) -> Result<Report> {
    let mut law = 0.0_f64;
    let mut growth = 0.0_f64;
    let mut small_time = 0.0_f64;
    for s in 0..samples {
        let xi = sample_hermitian(handle.dim(), sample_seed(seed, s as u64));
        for &a in times {
            let ta = handle.evolve(a, &xi)?;
            growth = growth.max(ta.norm() - xi.norm());
            for &b in times {
                let direct = handle.evolve(a + b, &xi)?;
                let composed = handle.evolve(b, &ta)?;
                law = law.max((&direct - &composed).norm());
            }
        }
        let tiny = handle.evolve(1e-9, &xi)?;
        small_time = small_time.max((&tiny - &xi).norm());
    }
    let zero = if samples > 0 {
        let xi = sample_hermitian(handle.dim(), seed);
        (&handle.evolve(0.0, &xi)? - &xi).norm()
    } else {
        0.0
    };
    Ok(Report::new("semigroup_law")
        .param("samples", samples)
        .param("times", times.to_vec())
        .metric("law_residual", law)
        .metric("norm_growth", growth)
        .metric("identity_at_zero", zero)
        .metric("small_time_displacement", small_time)
        .residual(law.max(zero), 1e-10)
        .require(growth <= 1e-12))
}

/// Order interval `[0, ξ₀]` is invariant (when `T_tξ₀ = ξ₀`) and positive
/// vectors stay positive.
pub fn markov_check(
    handle: &SemigroupHandle,
    ctx: &StandardFormContext,
    times: &[f64],
    seed: u64,
    samples: usize,
) -> Result<Report> {
    let xi0 = ctx.xi0();
    let conservative = handle.fixes(xi0);
    let per_time: Vec<Result<(f64, f64, f64, f64)>> = times
        .par_iter()
        .map(|&t| {
            let mut lower = f64::INFINITY;
            let mut upper = f64::INFINITY;
            let mut positive = f64::INFINITY;
            for s in 0..samples {
                let xi = sample_order_interval(ctx, sample_seed(seed, s as u64));
                let out = handle.evolve(t, &xi)?;
                lower = lower.min(linalg::min_eigenvalue(out.matrix()));
                if conservative {
                    upper = upper.min(linalg::min_eigenvalue(&(xi0.matrix() - out.matrix())));
                }
                let p = sample_positive(ctx.dim(), sample_seed(seed ^ 0x5EED, s as u64));
                positive = positive.min(linalg::min_eigenvalue(handle.evolve(t, &p)?.matrix()));
            }
            let fixed = (&handle.evolve(t, xi0)? - xi0).norm();
            Ok((lower, upper, positive, fixed))
        })
        .collect();
    let mut lower = f64::INFINITY;
    let mut upper = f64::INFINITY;
    let mut positive = f64::INFINITY;
    let mut fixed = 0.0_f64;
    for r in per_time {
        let (l, u, p, f) = r?;
        lower = lower.min(l);
        upper = upper.min(u);
        positive = positive.min(p);
        fixed = fixed.max(f);
    }
    let floor = lower.min(upper).min(positive);
    let mut report = Report::new("markov")
        .param("samples", samples)
        .param("times", times.to_vec())
        .param("conservative", conservative)
        .metric("min_eig_lower", finite_or_zero(lower))
        .metric("min_eig_upper", finite_or_zero(upper))
        .metric("min_eig_positive", finite_or_zero(positive))
        .metric("xi0_displacement", fixed)
        .residual((-finite_or_zero(floor)).max(0.0), FLOOR_TOL);
    if conservative {
        report = report.require(fixed <= 1e-10);
    } else {
        report = report.note("generator does not fix xi0; upper order bound not tested");
    }
    Ok(report)
}

fn finite_or_zero(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        0.0
    }
}

/// Choi matrix of `T_t` is positive semidefinite at each `t`.
pub fn cp_check(handle: &SemigroupHandle, times: &[f64]) -> Result<Report> {
    let mut worst = 0.0_f64;
    let mut min_eig = f64::INFINITY;
    let mut defect = 0.0_f64;
    for &t in times {
        let choi = choi_matrix(&handle.propagator(t)?, handle.dim());
        defect = defect.max(linalg::hermitian_defect(&choi));
        let m = linalg::min_eigenvalue(&choi);
        let scale = linalg::hermitian_norm(&choi);
        min_eig = min_eig.min(m);
        worst = worst.max(if scale > 0.0 { (-m).max(0.0) / scale } else { 0.0 });
    }
    Ok(Report::new("complete_positivity")
        .param("times", times.to_vec())
        .metric("min_choi_eigenvalue", finite_or_zero(min_eig))
        .metric("choi_hermitian_defect", defect)
        .residual(worst, FLOOR_TOL))
}

/// `‖ρ^{−1/4} T_tξ ρ^{−1/4}‖ / ‖ξ‖₂` for each sample.
fn superbound_ratios(
    handle: &SemigroupHandle,
    ctx: &StandardFormContext,
    t: f64,
    seed: u64,
    samples: usize,
) -> Result<(Vec<f64>, Option<String>)> {
    let mut ratios = Vec::with_capacity(samples);
    let mut warning = None;
    for s in 0..samples {
        let xi = sample_hermitian(ctx.dim(), sample_seed(seed, s as u64));
        let x = ctx.unembed(&handle.evolve(t, &xi)?)?;
        if warning.is_none() {
            warning = x.warning;
        }
        ratios.push(linalg::operator_norm(&x.matrix) / xi.norm());
    }
    Ok((ratios, warning))
}

/// For diagonal `H₀ = diag(h)`, the ratio attained by the basis projector
/// `e_k e_k*`: `w_k^{−1/2} e^{−2t h_k}`. The largest entry is the exact
/// supremum over diagonal vectors.
pub fn basis_projector_ratios(ctx: &StandardFormContext, h0_diag: &[f64], t: f64) -> Vec<f64> {
    ctx.log_weights()
        .iter()
        .zip(h0_diag)
        .map(|(lw, h)| (-0.5 * lw - 2.0 * t * h).exp())
        .collect()
}

/// Superboundedness at a single time.
pub fn superbounded_check(
    handle: &SemigroupHandle,
    ctx: &StandardFormContext,
    t: f64,
    seed: u64,
    samples: usize,
) -> Result<Report> {
    let (ratios, warning) = superbound_ratios(handle, ctx, t, seed, samples)?;
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    let passing = ratios.iter().filter(|r| **r <= 1.0 + SUPERBOUND_TOL).count();
    let mut report = Report::new("superbounded")
        .param("t", t)
        .param("samples", samples)
        .metric("max_ratio", worst)
        .metric("pass_fraction", fraction(passing, samples))
        .residual((worst - 1.0).max(0.0), SUPERBOUND_TOL);
    if let Some(w) = warning {
        report = report.note(w);
    }
    Ok(report)
}

fn fraction(n: usize, d: usize) -> f64 {
    if d == 0 {
        1.0
    } else {
        n as f64 / d as f64
    }
}

/// Outcome of a superboundedness scan over a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanPoint {
    pub t: f64,
    pub max_ratio: f64,
    pub pass_fraction: f64,
}

/// Smallest grid time at which every sample passes, with the pass fraction
/// required to be nondecreasing along the grid. When `bound` is given,
/// the threshold must not exceed it and every grid time at or above it must pass.
pub fn superbounded_threshold_scan(
    handle: &SemigroupHandle,
    ctx: &StandardFormContext,
    grid: &[f64],
    seed: u64,
    samples: usize,
    bound: Option<f64>,
) -> Result<(Report, Vec<ScanPoint>)> {
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let points: Vec<Result<ScanPoint>> = sorted
        .par_iter()
        .map(|&t| {
            let (ratios, _) = superbound_ratios(handle, ctx, t, seed, samples)?;
            let passing = ratios.iter().filter(|r| **r <= 1.0 + SUPERBOUND_TOL).count();
            Ok(ScanPoint {
                t,
                max_ratio: ratios.iter().copied().fold(0.0, f64::max),
                pass_fraction: fraction(passing, samples),
            })
        })
        .collect();
    let points: Vec<ScanPoint> = points.into_iter().collect::<Result<_>>()?;
    let monotone = points
        .windows(2)
        .all(|w| w[1].pass_fraction >= w[0].pass_fraction);
    let threshold = points
        .iter()
        .position(|p| p.pass_fraction == 1.0)
        .filter(|&i| points[i..].iter().all(|p| p.pass_fraction == 1.0))
        .map(|i| points[i].t);
    let mut report = Report::new("superbounded_scan")
        .param("samples", samples)
        .param("grid_points", points.len())
        .param("monotone", monotone);
    match threshold {
        Some(t) => report = report.param("threshold", t).metric("threshold", t),
        None => report = report.param("threshold", "none").note("no threshold found"),
    }
    let worst_above = bound
        .map(|b| {
            points
                .iter()
                .filter(|p| p.t >= b - 1e-12)
                .map(|p| p.max_ratio)
                .fold(0.0, f64::max)
        })
        .unwrap_or(0.0);
    if let Some(b) = bound {
        report = report.param("bound", b).metric("max_ratio_above_bound", worst_above);
    }
    let within = match (threshold, bound) {
        (Some(t), Some(b)) => t <= b + 1e-12 && worst_above <= 1.0 + SUPERBOUND_TOL,
        (Some(_), None) => true,
        (None, _) => false,
    };
    report = report
        .residual((worst_above - 1.0).max(0.0), SUPERBOUND_TOL)
        .require(monotone && within);
    if let (Some(diag), Some(t)) = (diagonal_h0(handle), threshold) {
        let worst = basis_projector_ratios(ctx, &diag, t)
            .into_iter()
            .fold(0.0, f64::max);
        report = report.metric("basis_projector_ratio_at_threshold", worst);
    }
    Ok((report, points))
}

fn diagonal_h0(handle: &SemigroupHandle) -> Option<Vec<f64>> {
    match &handle.structure {
        Structure::Sandwich { values, vectors } => {
            let h0 = vectors * linalg::diag_real(values) * vectors.adjoint();
            let off: f64 = (0..h0.nrows())
                .flat_map(|j| (0..h0.ncols()).map(move |k| (j, k)))
                .filter(|(j, k)| j != k)
                .map(|(j, k)| h0[(j, k)].norm())
                .fold(0.0, f64::max);
            (off <= 1e-12 * h0.norm().max(1.0)).then(|| linalg::real_diagonal(&h0))
        }
        Structure::General => None,
    }
}

/// `Sp(G₀) = {λ_j + λ_k}` as multisets and `n_{G₀}(λ) <= n_{H₀}(λ − λ₀)²`.
pub fn counting_bound_check(h0: &CMatrix) -> Result<Report> {
    let handle = SemigroupHandle::from_h0(h0)?;
    let h0_eigs = handle.h0_eigenvalues().expect("built from H0").to_vec();
    let mut pairs: Vec<f64> = h0_eigs
        .iter()
        .flat_map(|a| h0_eigs.iter().map(move |b| a + b))
        .collect();
    pairs.sort_by(f64::total_cmp);
    let spectrum = handle.spectrum();
    let scale = pairs
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(1.0);
    let tol = 1e-10 * scale;
    let multiset = pairs
        .iter()
        .zip(&spectrum.eigenvalues)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let lambda0 = h0_eigs.first().copied().unwrap_or(0.0);
    let count = |values: &[f64], x: f64| values.partition_point(|&e| e <= x + tol);
    let mut violations = 0usize;
    let mut min_slack = i64::MAX;
    for &e in &spectrum.eigenvalues {
        let lhs = count(&spectrum.eigenvalues, e);
        let rhs = count(&h0_eigs, e - lambda0).pow(2);
        if lhs > rhs {
            violations += 1;
        }
        min_slack = min_slack.min(rhs as i64 - lhs as i64);
    }
    Ok(Report::new("counting_bound")
        .param("dim", h0.nrows())
        .metric("multiset_residual", multiset)
        .metric("violations", violations as f64)
        .metric("min_count_slack", if min_slack == i64::MAX { 0.0 } else { min_slack as f64 })
        .residual(multiset / scale, 1e-10)
        .require(violations == 0))
}

/// `Tr e^{−tH} <= (Tr e^{−tQ})²`, with `Q` taken both from the truncated
/// matrix and, when supplied, from an untruncated diagonal profile.
pub fn heat_trace_bound_check(
    gen: &DirichletGenerator,
    handle: &SemigroupHandle,
    t: f64,
    profile: Option<&[f64]>,
) -> Result<Report> {
    let trace = handle.heat_trace(t)?;
    let doubled = handle.heat_trace(2.0 * t)?;
    let q = q_operator(&gen.x().matrix, gen.lambda()).matrix;
    let q_trace: f64 = linalg::eigvalsh(&q).iter().map(|e| (-t * e).exp()).sum();
    let truncated = q_trace * q_trace;
    let mut report = Report::new("heat_trace_bound")
        .param("t", t)
        .param("dim", gen.dim())
        .metric("heat_trace", trace)
        .metric("heat_trace_doubled_time", doubled)
        .metric("truncated_bound", truncated)
        .metric("truncated_slack", truncated - trace);
    let mut excess = (trace - truncated).max(0.0) / truncated.max(f64::MIN_POSITIVE);
    if let Some(profile) = profile {
        let s: f64 = profile.iter().map(|q| (-t * q).exp()).sum();
        let bound = s * s;
        report = report
            .metric("profile_bound", bound)
            .metric("profile_slack", bound - trace);
        excess = excess.max((trace - bound).max(0.0) / bound.max(f64::MIN_POSITIVE));
    }
    Ok(report.residual(excess, 1e-12).require(doubled < trace))
}

/// Heat-trace bound for `X_m = (A*)^m` at `λ_m`, using the untruncated profile.
pub fn ladder_heat_trace_bound_check(gen: &DirichletGenerator, m: usize, t: f64) -> Result<Report> {
    let handle = SemigroupHandle::from_dirichlet(gen);
    let profile = ladder_q_profile(m, gen.lambda(), gen.dim());
    Ok(heat_trace_bound_check(gen, &handle, t, Some(&profile))?.param("m", m))
}

/// Number of eigenvalues within `tol` of zero.
pub fn kernel_dimension(spectrum: &Spectrum, tol: f64) -> usize {
    spectrum.eigenvalues.iter().filter(|e| e.abs() <= tol).count()
}
