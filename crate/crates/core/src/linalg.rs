//! Dense complex linear algebra helpers shared by every module.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn diag_real(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { re(values[i]) } else { ZERO })
}

pub fn real_diagonal(m: &CMatrix) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, i)].re).collect()
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * re(0.5)
}

/// `‖m − m*‖_F / ‖m‖_F`, zero for the zero matrix.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.norm();
    if n == 0.0 {
        0.0
    } else {
        (m - m.adjoint()).norm() / n
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(hermitian_part(m))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    eigvalsh(m).first().copied().unwrap_or(0.0)
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Spectral norm of a Hermitian matrix, from its eigenvalues.
pub fn hermitian_norm(m: &CMatrix) -> f64 {
    eigvalsh(m).iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Column-stacking vectorization; nalgebra storage is already column-major.
pub fn vectorize(m: &CMatrix) -> DVector<C64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &DVector<C64>, dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// Functional calculus `U f(Λ) U*` for a Hermitian matrix.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let fd = diag_real(&vals.iter().map(|&x| f(x)).collect::<Vec<_>>());
    &vecs * fd * vecs.adjoint()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-sample seed derived from a base seed; keeps sample streams independent.
pub fn sample_seed(base: u64, index: u64) -> u64 {
    base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn complex_gaussian<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        C64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Gaussian Hermitian matrix normalized to unit Hilbert–Schmidt norm.
pub fn hermitian_unit<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let h = hermitian_part(&complex_gaussian(n, rng));
    let norm = h.norm();
    h / re(norm)
}

/// Haar-like random unitary from the QR factorization of a Gaussian matrix.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let qr = complex_gaussian(n, rng).qr();
    let q = qr.q();
    let r = qr.r();
    // Fix the column phases so the distribution does not depend on the QR convention.
    let mut u = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / re(d.norm()) } else { ONE };
        for i in 0..n {
            u[(i, j)] *= phase;
        }
    }
    u
}
