//! Machine-readable outcome of a verification.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Hypotheses of the checked statement are not met by the input.
    NotApplicable,
    /// Not run because the scenario budget was exhausted.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub check: String,
    /// Identifier of the mathematical statement the check certifies, or "plumbing".
    pub anchor: String,
    pub params: BTreeMap<String, Value>,
    pub residual: f64,
    pub tolerance: f64,
    pub status: Status,
    pub pass: bool,
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
    /// Truncation-boundary indices excluded from the identity.
    #[serde(default)]
    pub boundary: Vec<usize>,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(default)]
    pub wall_time_ms: f64,
}

impl Report {
    pub fn new(check: &str) -> Self {
        let anchor = anchor_for(check).unwrap_or("plumbing").to_string();
        Self {
            check: check.to_string(),
            anchor,
            params: BTreeMap::new(),
            residual: 0.0,
            tolerance: 0.0,
            status: Status::Pass,
            pass: true,
            metrics: BTreeMap::new(),
            boundary: Vec::new(),
            notes: Vec::new(),
            wall_time_ms: 0.0,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    /// Float parameter that keeps infinities readable in JSON.
    pub fn param_f64(self, key: &str, value: f64) -> Self {
        let v = if value.is_finite() {
            Value::from(value)
        } else if value > 0.0 {
            Value::from("+inf")
        } else if value < 0.0 {
            Value::from("-inf")
        } else {
            Value::from("nan")
        };
        self.param(key, v)
    }

    pub fn metric(mut self, key: &str, value: f64) -> Self {
        self.metrics.insert(key.to_string(), value);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn boundary(mut self, indices: Vec<usize>) -> Self {
        self.boundary = indices;
        self
    }

    /// Sets residual and tolerance; passes iff `residual <= tolerance`.
    pub fn residual(mut self, residual: f64, tolerance: f64) -> Self {
        self.residual = residual;
        self.tolerance = tolerance;
        let ok = residual <= tolerance;
        self.set_status(if ok { Status::Pass } else { Status::Fail });
        self
    }

    /// Forces the status, keeping any residual already recorded.
    pub fn with_status(mut self, status: Status) -> Self {
        self.set_status(status);
        self
    }

    /// Combines the current status with an extra condition.
    pub fn require(mut self, ok: bool) -> Self {
        if !ok && self.status == Status::Pass {
            self.set_status(Status::Fail);
        }
        self
    }

    fn set_status(&mut self, status: Status) {
        self.status = status;
        self.pass = status == Status::Pass;
    }

    pub fn passed(&self) -> bool {
        self.pass
    }

    /// Copy without the wall-time field, for determinism comparisons.
    pub fn numerical_content(&self) -> Self {
        let mut r = self.clone();
        r.wall_time_ms = 0.0;
        r
    }
}

/// Catalogue entry for a check identifier.
#[derive(Clone, Copy, Debug)]
pub struct CheckInfo {
    pub id: &'static str,
    pub anchor: &'static str,
    pub statement: &'static str,
}

pub const CATALOGUE: &[CheckInfo] = &[
    CheckInfo {
        id: "ladder_identities",
        anchor: "ccr/ladder-power-products",
        statement: "X_m^* X_m = (N+1)...(N+m) and X_m X_m^* = N(N-1)...(N-m+1) for X_m = (A^*)^m",
    },
    CheckInfo {
        id: "modular_eigenvector",
        anchor: "modular/ladder-power-eigenvector",
        statement: "Delta^{1/2} X xi0 = lambda^2 X xi0",
    },
    CheckInfo {
        id: "generator_identity",
        anchor: "generator/expanded-equals-squared-derivations",
        statement: "|d_X^l|^2 + |d_{X*}^{1/l}|^2 = l^2(X*X + j(X*X)) + l^-2(XX* + j(XX*)) - 2(X* j(X*) + X j(X))",
    },
    CheckInfo {
        id: "coercivity_identity",
        anchor: "generator/coercivity-identity",
        statement: "H - (|d_X|^2 + |d_{X*}|^2) = (l^2-1)(X*X + j(X*X)) + (l^-2-1)(XX* + j(XX*))",
    },
    CheckInfo {
        id: "coercivity_bound",
        anchor: "generator/coercivity-bound",
        statement: "H >= (l^2-e^2)X*X + (l^2-e^-2)j(X*X) + (l^-2-d^2)XX* + (l^-2-d^-2)j(XX*)",
    },
    CheckInfo {
        id: "minmax_domination",
        anchor: "generator/minmax-domination",
        statement: "sorted eigenvalues of Q + j(Q) are dominated by those of H",
    },
    CheckInfo {
        id: "form_expansion",
        anchor: "form/explicit-quadratic-form",
        statement: "E[xi] = l^2(|X xi|^2 + |X J xi|^2) + l^-2(|X* xi|^2 + |X* J xi|^2) - 2 Re[(X xi|J X* J xi) + (X* xi|J X J xi)] on J-real xi",
    },
    CheckInfo {
        id: "j_reality",
        anchor: "form/j-real",
        statement: "H maps Hermitian vectors to Hermitian vectors",
    },
    CheckInfo {
        id: "beurling_deny",
        anchor: "form/first-beurling-deny",
        statement: "E(xi_+ | xi_-) <= 0",
    },
    CheckInfo {
        id: "conservativeness",
        anchor: "form/conservative-iff-modular-eigenvector",
        statement: "E[xi0] = 0 iff Delta^{1/2} X xi0 = (mu/nu) X xi0",
    },
    CheckInfo {
        id: "conservativeness_mismatch",
        anchor: "form/conservative-iff-modular-eigenvector",
        statement: "negative control: with lambda scaled by 1.1 both sides of the equivalence fail",
    },
    CheckInfo {
        id: "intertwining",
        anchor: "derivation/intertwines-symmetric-embedding",
        statement: "d_X^l(i0(y)) = i0(i[X, y])",
    },
    CheckInfo {
        id: "markov",
        anchor: "semigroup/markovian",
        statement: "0 <= xi <= xi0 implies 0 <= T_t xi <= xi0",
    },
    CheckInfo {
        id: "complete_positivity",
        anchor: "semigroup/completely-positive",
        statement: "Choi matrix of T_t is positive semidefinite",
    },
    CheckInfo {
        id: "semigroup_law",
        anchor: "semigroup/semigroup-law",
        statement: "T_{s+t} = T_s T_t, |T_t xi| <= |xi|",
    },
    CheckInfo {
        id: "q_leading_coefficient",
        anchor: "ladder/q-operator-growth",
        statement: "Q for X_m grows like (l_m - l_m^-1)^2 N^m with (l_m - l_m^-1)^2 = (2 sinh(m beta/4))^2",
    },
    CheckInfo {
        id: "heat_trace_bound",
        anchor: "ladder/heat-trace-bound",
        statement: "Tr exp(-tH) <= (Tr exp(-tQ))^2",
    },
    CheckInfo {
        id: "superbounded",
        anchor: "semigroup/superbounded-beyond-quarter-beta",
        statement: "|rho^{-1/4} T_t xi rho^{-1/4}| <= |xi|_2 at a fixed t",
    },
    CheckInfo {
        id: "superbounded_scan",
        anchor: "semigroup/superbounded-beyond-quarter-beta",
        statement: "|rho^{-1/4} T_t xi rho^{-1/4}| <= |xi|_2 for t > beta/4",
    },
    CheckInfo {
        id: "counting_bound",
        anchor: "semigroup/counting-function-bound",
        statement: "Sp(G0) = {l_j + l_k}, n_G0(l) <= n_H0(l - l_0)^2",
    },
    CheckInfo {
        id: "deformation_crosscheck",
        anchor: "deformation/quadrature-equals-functional-calculus",
        statement: "int exp(-it beta g(N)) A exp(it beta g(N)) f(t) dt = A fhat(beta k(N))",
    },
    CheckInfo {
        id: "deformed_eigenvector",
        anchor: "deformation/modular-eigenvector",
        statement: "Delta^{1/4} X xi0 = exp(-b/4) X xi0 for the cosh family",
    },
    CheckInfo {
        id: "deformed_ccr",
        anchor: "deformation/deformed-ccr",
        statement: "X*X = |fhat(beta k(N))|^2 N, XX* = |fhat(beta k(N+1))|^2 (N+1)",
    },
    CheckInfo {
        id: "hyperbolic_commutator",
        anchor: "deformation/hyperbolic-commutator",
        statement: "[A^2, (A*)^2] = 2 + 4N",
    },
    CheckInfo {
        id: "abelian_threshold",
        anchor: "abelian/supercontractivity-threshold",
        statement: "T_t supercontractive iff t >= t0 = |(U+h)_+/V|_inf / 2",
    },
    CheckInfo {
        id: "abelian_embedding",
        anchor: "abelian/supercontractivity-threshold",
        statement: "diagonal embedding into the standard form reproduces t0 within grid resolution",
    },
];

pub fn check_info(id: &str) -> Option<&'static CheckInfo> {
    CATALOGUE.iter().find(|c| c.id == id)
}

pub fn anchor_for(id: &str) -> Option<&'static str> {
    check_info(id).map(|c| c.anchor)
}
