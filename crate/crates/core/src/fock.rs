//! Truncated one-mode Fock space: ladder operators, functions of the number
//! operator and Gibbs data for a Hamiltonian profile `g(N)`.
//!
//! Operators are compressed to the span of `e_0, ..., e_{dim-1}`. The
//! canonical commutation relation only fails in the top corner of that span,
//! so identities that depend on it are checked on interior indices and the
//! excluded boundary indices are reported.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{diag_real, re, CMatrix, ZERO};
use crate::report::Report;
use crate::standard_form::HsVector;

/// Hamiltonian profile `k ↦ g(k)`, dimensionless.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Profile {
    /// `g(k) = k`
    Linear,
    /// `g(k) = ln(k + offset)`, `offset >= 2`
    Log { offset: f64 },
    /// Tabulated values `g(0), g(1), ...`
    Table { values: Vec<f64> },
}

impl Profile {
    /// Value at `k >= 0`.
    pub fn at(&self, k: usize) -> f64 {
        match self {
            Profile::Linear => k as f64,
            Profile::Log { offset } => (k as f64 + offset).ln(),
            Profile::Table { values } => values[k],
        }
    }

    /// Number of points where the profile is defined, `None` if unbounded.
    pub fn len(&self) -> Option<usize> {
        match self {
            Profile::Table { values } => Some(values.len()),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockSpec {
    pub dim: usize,
    pub g: Profile,
    pub beta: f64,
}

impl FockSpec {
    pub fn new(dim: usize, g: Profile, beta: f64) -> Result<Self> {
        let spec = Self { dim, g, beta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn linear(dim: usize, beta: f64) -> Result<Self> {
        Self::new(dim, Profile::Linear, beta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidSpec(format!("dim must be >= 2, got {}", self.dim)));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::InvalidSpec(format!("beta must be positive, got {}", self.beta)));
        }
        match &self.g {
            Profile::Linear => {}
            Profile::Log { offset } => {
                if !(offset.is_finite() && *offset >= 2.0) {
                    return Err(Error::InvalidSpec(format!("log offset must be >= 2, got {offset}")));
                }
            }
            Profile::Table { values } => {
                if values.len() < self.dim {
                    return Err(Error::InvalidSpec(format!(
                        "table has {} values, need at least dim = {}",
                        values.len(),
                        self.dim
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidSpec("table values must be finite".into()));
                }
            }
        }
        for k in 1..self.dim {
            if self.g.at(k) < self.g.at(k - 1) {
                return Err(Error::InvalidSpec(format!("g is not monotone increasing at k = {k}")));
            }
        }
        Ok(())
    }

    pub fn energy(&self, k: usize) -> f64 {
        self.g.at(k)
    }

    /// Level spacing `k(n) = g(n) - g(n-1)`, with `g(-1) := g(0)`.
    ///
    /// Defined for `n <= dim - 1`, and for `n = dim` when the profile extends
    /// past the truncation.
    pub fn gap(&self, n: usize) -> Option<f64> {
        if n == 0 {
            return Some(0.0);
        }
        match self.g.len() {
            Some(len) if n >= len => None,
            _ => Some(self.g.at(n) - self.g.at(n - 1)),
        }
    }

    pub fn energies(&self) -> Vec<f64> {
        (0..self.dim).map(|k| self.energy(k)).collect()
    }
}

/// A matrix acting on the truncated Fock space by left multiplication.
#[derive(Clone, Debug, PartialEq)]
pub struct AffiliatedOperator {
    pub matrix: CMatrix,
    pub label: String,
}

impl AffiliatedOperator {
    pub fn new(matrix: CMatrix, label: impl Into<String>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("operator has non-finite entries".into()));
        }
        Ok(Self {
            matrix,
            label: label.into(),
        })
    }

    pub fn custom(matrix: CMatrix) -> Result<Self> {
        Self::new(matrix, "custom")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            label: format!("({})*", self.label),
        }
    }
}

/// Truncated annihilation and creation operators, `A e_k = √k e_{k-1}`.
pub fn ladder(spec: &FockSpec) -> Result<(AffiliatedOperator, AffiliatedOperator)> {
    spec.validate()?;
    let n = spec.dim;
    let a = CMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            re((j as f64).sqrt())
        } else {
            ZERO
        }
    });
    let adag = a.adjoint();
    Ok((
        AffiliatedOperator { matrix: a, label: "annihilation".into() },
        AffiliatedOperator { matrix: adag, label: "creation".into() },
    ))
}

pub fn number_operator(dim: usize) -> CMatrix {
    diag_real(&(0..dim).map(|k| k as f64).collect::<Vec<_>>())
}

/// `φ(N)` as a diagonal matrix.
pub fn number_function(dim: usize, phi: impl Fn(usize) -> f64) -> CMatrix {
    diag_real(&(0..dim).map(phi).collect::<Vec<_>>())
}

/// `X_m = (A*)^m`.
pub fn ladder_power(spec: &FockSpec, m: usize) -> Result<AffiliatedOperator> {
    if m == 0 {
        return Err(Error::InvalidParameter("ladder power must be >= 1".into()));
    }
    if m >= spec.dim {
        return Err(Error::Degenerate(format!(
            "(A*)^{m} vanishes identically at dim = {}",
            spec.dim
        )));
    }
    let (_, adag) = ladder(spec)?;
    let mut x = adag.matrix.clone();
    for _ in 1..m {
        x = &x * &adag.matrix;
    }
    Ok(AffiliatedOperator {
        matrix: x,
        label: format!("ladder_power {m}"),
    })
}

/// Indices `k` where `X_m` (or its adjoint) runs into the truncation.
pub fn boundary_indices(dim: usize, m: usize) -> Vec<usize> {
    (dim.saturating_sub(m)..dim).collect()
}

/// Checks `X_m*X_m = Π_{j=1}^m (N+j)` on interior indices and
/// `X_m X_m* = Π_{j=0}^{m-1} (N-j)` on every index.
pub fn product_identity_check(spec: &FockSpec, m: usize) -> Result<Report> {
    let x = ladder_power(spec, m)?;
    let dim = spec.dim;
    let xs_x = x.matrix.adjoint() * &x.matrix;
    let x_xs = &x.matrix * x.matrix.adjoint();
    let rising = |k: usize| (1..=m).map(|j| (k + j) as f64).product::<f64>();
    let falling = |k: usize| (0..m).map(|j| k as f64 - j as f64).product::<f64>();

    let interior = dim - m;
    let mut upper = 0.0_f64;
    let mut lower = 0.0_f64;
    for r in 0..dim {
        for c in 0..dim {
            if r < interior && c < interior {
                let want = if r == c { rising(r) } else { 0.0 };
                upper = upper.max((xs_x[(r, c)] - re(want)).norm());
            }
            let want = if r == c { falling(r) } else { 0.0 };
            lower = lower.max((x_xs[(r, c)] - re(want)).norm());
        }
    }
    let tol = 1e-12 * (dim as f64).powi(m as i32);
    Ok(Report::new("ladder_identities")
        .param("dim", dim)
        .param("m", m)
        .metric("rising_residual", upper)
        .metric("falling_residual", lower)
        .boundary(boundary_indices(dim, m))
        .residual(upper.max(lower), tol))
}

/// Gibbs state of `g(N)` at inverse temperature `β`, renormalized over the truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct GibbsData {
    pub spec: FockSpec,
    pub weights: Vec<f64>,
    pub log_weights: Vec<f64>,
    /// `ξ₀ = ρ^{1/2}`
    pub xi0: HsVector,
    pub rho: HsVector,
    /// Log of the truncated partition function `Σ_{k<dim} e^{-βg(k)}`.
    pub log_z: f64,
}

pub fn gibbs_data(spec: &FockSpec) -> Result<GibbsData> {
    spec.validate()?;
    let exponents: Vec<f64> = (0..spec.dim).map(|k| -spec.beta * spec.energy(k)).collect();
    let peak = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_z = peak + exponents.iter().map(|e| (e - peak).exp()).sum::<f64>().ln();
    let log_weights: Vec<f64> = exponents.iter().map(|e| e - log_z).collect();
    let raw: Vec<f64> = log_weights.iter().map(|l| l.exp()).collect();
    if let Some(k) = raw.iter().position(|&w| !(w > 0.0)) {
        return Err(Error::Conditioning {
            row: k,
            col: k,
            log_factor: log_weights[k],
        });
    }
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let xi0 = HsVector::new(diag_real(&weights.iter().map(|w| w.sqrt()).collect::<Vec<_>>()));
    let rho = HsVector::new(diag_real(&weights));
    Ok(GibbsData {
        spec: spec.clone(),
        weights,
        log_weights,
        xi0,
        rho,
        log_z,
    })
}

/// Untruncated Gibbs weight `(1 - e^{-β}) e^{-βk}` of the linear profile.
pub fn analytic_linear_weight(beta: f64, k: usize) -> f64 {
    -(-beta).exp_m1() * (-beta * k as f64).exp()
}
