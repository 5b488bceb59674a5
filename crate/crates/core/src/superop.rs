//! Linear maps on Hilbert–Schmidt space stored as sums of sandwiches.

use std::sync::OnceLock;

use crate::linalg::{identity, CMatrix, C64};
use crate::standard_form::HsVector;

/// `ξ ↦ Σ_i L_i ξ R_i`.
///
/// The dense realization uses column stacking: `vec(ξ)[j + dim·k] = ξ[j,k]`,
/// so the entry at `((j,k),(p,q))` is `Σ_i L_i[j,p] R_i[q,k]`. It is built on
/// first use and cached.
#[derive(Clone, Debug)]
pub struct SuperOperator {
    dim: usize,
    terms: Vec<(CMatrix, CMatrix)>,
    dense: OnceLock<CMatrix>,
}

impl SuperOperator {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
            dense: OnceLock::new(),
        }
    }

    pub fn sandwich(left: CMatrix, right: CMatrix) -> Self {
        let mut op = Self::new(left.nrows());
        op.push(left, right);
        op
    }

    /// `ξ ↦ Lξ`
    pub fn left(left: CMatrix) -> Self {
        let n = left.nrows();
        Self::sandwich(left, identity(n))
    }

    /// `ξ ↦ ξR`
    pub fn right(right: CMatrix) -> Self {
        let n = right.nrows();
        Self::sandwich(identity(n), right)
    }

    pub fn identity(dim: usize) -> Self {
        Self::sandwich(identity(dim), identity(dim))
    }

    pub fn push(&mut self, left: CMatrix, right: CMatrix) {
        assert_eq!(left.nrows(), self.dim, "left factor has wrong dimension");
        assert_eq!(right.nrows(), self.dim, "right factor has wrong dimension");
        self.terms.push((left, right));
        self.dense = OnceLock::new();
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(CMatrix, CMatrix)] {
        &self.terms
    }

    pub fn apply(&self, xi: &HsVector) -> HsVector {
        let x = xi.matrix();
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (l, r) in &self.terms {
            out += l * x * r;
        }
        HsVector::new(out)
    }

    pub fn scaled(&self, c: C64) -> Self {
        let mut op = Self::new(self.dim);
        for (l, r) in &self.terms {
            op.push(l * c, r.clone());
        }
        op
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut op = self.clone();
        for (l, r) in &other.terms {
            op.push(l.clone(), r.clone());
        }
        op
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scaled(C64::new(-1.0, 0.0)))
    }

    /// Hilbert–Schmidt adjoint: `(LξR)† = L* ξ R*`.
    pub fn adjoint(&self) -> Self {
        let mut op = Self::new(self.dim);
        for (l, r) in &self.terms {
            op.push(l.adjoint(), r.adjoint());
        }
        op
    }

    /// `self ∘ other`, applying `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        let mut op = Self::new(self.dim);
        for (l1, r1) in &self.terms {
            for (l2, r2) in &other.terms {
                op.push(l1 * l2, r2 * r1);
            }
        }
        op
    }

    pub fn dense(&self) -> &CMatrix {
        self.dense.get_or_init(|| {
            let n2 = self.dim * self.dim;
            let mut m = CMatrix::zeros(n2, n2);
            for (l, r) in &self.terms {
                m += r.transpose().kronecker(l);
            }
            m
        })
    }

    /// `‖D − D*‖_F / ‖D‖_F` of the dense realization.
    pub fn self_adjoint_defect(&self) -> f64 {
        crate::linalg::hermitian_defect(self.dense())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_gaussian, rng, unvectorize, vectorize};
    use crate::standard_form::{hs_inner, sample_general};

    fn random_op(dim: usize, terms: usize, seed: u64) -> SuperOperator {
        let mut r = rng(seed);
        let mut op = SuperOperator::new(dim);
        for _ in 0..terms {
            op.push(complex_gaussian(dim, &mut r), complex_gaussian(dim, &mut r));
        }
        op
    }

    #[test]
    fn dense_agrees_with_terms() {
        let op = random_op(4, 3, 1);
        let xi = sample_general(4, 2);
        let via_dense = unvectorize(&(op.dense() * vectorize(xi.matrix())), 4);
        assert!((via_dense - op.apply(&xi).matrix()).norm() < 1e-12);
    }

    #[test]
    fn dense_entry_convention() {
        let mut r = rng(3);
        let l = complex_gaussian(3, &mut r);
        let rr = complex_gaussian(3, &mut r);
        let op = SuperOperator::sandwich(l.clone(), rr.clone());
        let d = op.dense();
        for (j, k, p, q) in [(0, 1, 2, 0), (2, 2, 1, 1), (1, 0, 0, 2)] {
            assert!((d[(j + 3 * k, p + 3 * q)] - l[(j, p)] * rr[(q, k)]).norm() < 1e-14);
        }
    }

    #[test]
    fn adjoint_matches_inner_product() {
        let op = random_op(4, 2, 5);
        let a = sample_general(4, 6);
        let b = sample_general(4, 7);
        let lhs = hs_inner(&a, &op.apply(&b)).unwrap();
        let rhs = hs_inner(&op.adjoint().apply(&a), &b).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
        assert!((op.adjoint().dense() - op.dense().adjoint()).norm() < 1e-12);
    }

    #[test]
    fn composition_order() {
        let f = random_op(3, 2, 8);
        let g = random_op(3, 2, 9);
        let xi = sample_general(3, 10);
        let lhs = f.compose(&g).apply(&xi);
        let rhs = f.apply(&g.apply(&xi));
        assert!((&lhs - &rhs).norm() < 1e-12);
    }

    #[test]
    fn cache_resets_on_push() {
        let mut op = SuperOperator::identity(2);
        let before = op.dense().clone();
        op.push(identity(2), identity(2));
        assert!((op.dense() - before * C64::new(2.0, 0.0)).norm() < 1e-15);
    }
}
