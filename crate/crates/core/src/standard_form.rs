//! Standard form of the truncated algebra: Hilbert–Schmidt space, modular
//! operator `Δ₀ξ = ρξρ^{-1}`, conjugation `Jξ = ξ*`, the Tomita map `S₀`,
//! the commutant action `j(Y)ξ = ξY*` and the symmetric embedding
//! `i₀(x) = ρ^{1/4} x ρ^{1/4}`.
//!
//! `J` is antilinear and is never stored as a matrix; every superoperator
//! containing it is first reduced to left and right multiplications.

use std::ops::{Add, Mul, Sub};

use rand::Rng;

use crate::error::{Error, Result};
use crate::fock::GibbsData;
use crate::linalg::{self, re, CMatrix, C64};
use crate::superop::SuperOperator;

/// Hermiticity tolerance relative to the Hilbert–Schmidt norm.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Allowed negativity of the smallest eigenvalue for cone membership.
pub const CONE_TOL: f64 = 1e-10;
/// Largest log-factor accepted before a modular factor is declared ill-conditioned.
pub const MAX_LOG_FACTOR: f64 = 700.0;
/// Embedding inverse factor above which `unembed` warns.
pub const UNEMBED_WARN: f64 = 1e8;

/// Element of `L²(h)`: a matrix with the Hilbert–Schmidt inner product.
#[derive(Clone, Debug, PartialEq)]
pub struct HsVector(CMatrix);

impl HsVector {
    pub fn new(matrix: CMatrix) -> Self {
        Self(matrix)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn inner(&self, other: &HsVector) -> Result<C64> {
        hs_inner(self, other)
    }

    /// J-real predicate: Hermitian within [`HERMITIAN_TOL`].
    pub fn is_j_real(&self) -> bool {
        linalg::hermitian_defect(&self.0) <= HERMITIAN_TOL
    }

    /// Positive-cone predicate.
    pub fn in_cone(&self) -> bool {
        self.is_j_real() && linalg::min_eigenvalue(&self.0) >= -CONE_TOL
    }

    pub fn scale(&self, c: C64) -> Self {
        Self(&self.0 * c)
    }
}

impl Add for &HsVector {
    type Output = HsVector;
    fn add(self, rhs: &HsVector) -> HsVector {
        HsVector(&self.0 + &rhs.0)
    }
}

impl Sub for &HsVector {
    type Output = HsVector;
    fn sub(self, rhs: &HsVector) -> HsVector {
        HsVector(&self.0 - &rhs.0)
    }
}

/// Left action of an operator on a vector.
impl Mul<&HsVector> for &CMatrix {
    type Output = HsVector;
    fn mul(self, rhs: &HsVector) -> HsVector {
        HsVector(self * &rhs.0)
    }
}

/// `(ξ|η) = Tr(ξ*η)`, antilinear in the first slot.
pub fn hs_inner(xi: &HsVector, eta: &HsVector) -> Result<C64> {
    if xi.dim() != eta.dim() {
        return Err(Error::DimensionMismatch {
            expected: xi.dim(),
            found: eta.dim(),
        });
    }
    Ok(xi.0.dotc(&eta.0))
}

/// `Jξ = ξ*`.
pub fn conj_j(xi: &HsVector) -> HsVector {
    HsVector(xi.0.adjoint())
}

/// `j(Y)ξ = JYJξ = ξY*`.
pub fn j_action(y: &CMatrix, xi: &HsVector) -> HsVector {
    HsVector(&xi.0 * y.adjoint())
}

#[derive(Clone, Debug)]
pub struct JordanParts {
    pub plus: HsVector,
    pub minus: HsVector,
    pub abs: HsVector,
}

/// Spectral splitting `ξ = ξ₊ − ξ₋` of a Hermitian vector, with `|ξ| = ξ₊ + ξ₋`.
pub fn jordan_decompose(xi: &HsVector) -> Result<JordanParts> {
    let defect = linalg::hermitian_defect(&xi.0);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let plus = linalg::hermitian_function(&xi.0, |x| x.max(0.0));
    let minus = linalg::hermitian_function(&xi.0, |x| (-x).max(0.0));
    let abs = &plus + &minus;
    Ok(JordanParts {
        plus: HsVector(plus),
        minus: HsVector(minus),
        abs: HsVector(abs),
    })
}

/// Result of inverting the symmetric embedding.
#[derive(Clone, Debug)]
pub struct Unembedded {
    pub matrix: CMatrix,
    /// Set when `max w^{-1/4}` exceeds [`UNEMBED_WARN`].
    pub warning: Option<String>,
}

/// Modular data of the Gibbs vector `ξ₀`.
#[derive(Clone, Debug)]
pub struct StandardFormContext {
    gibbs: GibbsData,
    quarter: Vec<f64>,
    inv_quarter: Vec<f64>,
}

impl StandardFormContext {
    pub fn new(gibbs: GibbsData) -> Result<Self> {
        let lw = &gibbs.log_weights;
        let (hi, lo) = extreme_indices(lw);
        let spread = lw[hi] - lw[lo];
        if spread > MAX_LOG_FACTOR {
            return Err(Error::Conditioning {
                row: hi,
                col: lo,
                log_factor: spread,
            });
        }
        let quarter = lw.iter().map(|l| (0.25 * l).exp()).collect();
        let inv_quarter = lw.iter().map(|l| (-0.25 * l).exp()).collect();
        Ok(Self {
            gibbs,
            quarter,
            inv_quarter,
        })
    }

    pub fn from_spec(spec: &crate::fock::FockSpec) -> Result<Self> {
        Self::new(crate::fock::gibbs_data(spec)?)
    }

    pub fn dim(&self) -> usize {
        self.gibbs.spec.dim
    }

    pub fn gibbs(&self) -> &GibbsData {
        &self.gibbs
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.gibbs.log_weights
    }

    pub fn weights(&self) -> &[f64] {
        &self.gibbs.weights
    }

    pub fn xi0(&self) -> &HsVector {
        &self.gibbs.xi0
    }

    pub fn beta(&self) -> f64 {
        self.gibbs.spec.beta
    }

    fn check_dim(&self, m: &CMatrix) -> Result<()> {
        if m.nrows() != self.dim() || m.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: m.nrows(),
            });
        }
        Ok(())
    }

    /// `i₀(x) = ρ^{1/4} x ρ^{1/4}`.
    pub fn embed(&self, x: &CMatrix) -> Result<HsVector> {
        self.check_dim(x)?;
        let q = &self.quarter;
        Ok(HsVector(CMatrix::from_fn(self.dim(), self.dim(), |j, k| {
            x[(j, k)] * (q[j] * q[k])
        })))
    }

    /// Largest entry of `ρ^{-1/4}`.
    pub fn embedding_conditioning(&self) -> f64 {
        self.inv_quarter.iter().copied().fold(0.0, f64::max)
    }

    /// `ρ^{-1/4} ξ ρ^{-1/4}`.
    pub fn unembed(&self, xi: &HsVector) -> Result<Unembedded> {
        self.check_dim(&xi.0)?;
        let iq = &self.inv_quarter;
        let lw = self.log_weights();
        let (_, lo) = extreme_indices(lw);
        if !(iq[lo] * iq[lo]).is_finite() {
            return Err(Error::Conditioning {
                row: lo,
                col: lo,
                log_factor: -0.5 * lw[lo],
            });
        }
        let matrix = CMatrix::from_fn(self.dim(), self.dim(), |j, k| xi.0[(j, k)] * (iq[j] * iq[k]));
        let cond = self.embedding_conditioning();
        let warning = (cond > UNEMBED_WARN)
            .then(|| format!("inverse embedding factor {cond:.3e} exceeds {UNEMBED_WARN:e}"));
        Ok(Unembedded { matrix, warning })
    }

    /// `Δ₀^s ξ`: entry `(j,k)` scaled by `(w_j/w_k)^s`, `|s| <= 1`.
    pub fn modular_power(&self, s: f64, xi: &HsVector) -> Result<HsVector> {
        if !(s.abs() <= 1.0) {
            return Err(Error::InvalidParameter(format!("modular power needs |s| <= 1, got {s}")));
        }
        self.check_dim(&xi.0)?;
        let lw = self.log_weights();
        let (hi, lo) = extreme_indices(lw);
        let worst = s.abs() * (lw[hi] - lw[lo]);
        if worst > MAX_LOG_FACTOR {
            let (row, col) = if s >= 0.0 { (hi, lo) } else { (lo, hi) };
            return Err(Error::Conditioning {
                row,
                col,
                log_factor: worst,
            });
        }
        Ok(HsVector(CMatrix::from_fn(self.dim(), self.dim(), |j, k| {
            xi.0[(j, k)] * (s * (lw[j] - lw[k])).exp()
        })))
    }

    /// `Δ₀^{it} ξ`: entry `(j,k)` multiplied by `e^{it(ln w_j − ln w_k)}`.
    pub fn modular_unitary(&self, t: f64, xi: &HsVector) -> HsVector {
        let lw = self.log_weights();
        HsVector(CMatrix::from_fn(self.dim(), self.dim(), |j, k| {
            xi.0[(j, k)] * C64::from_polar(1.0, t * (lw[j] - lw[k]))
        }))
    }

    /// `S₀ = J Δ₀^{1/2}`, i.e. `ξ ↦ ρ^{-1/2} ξ* ρ^{1/2}`.
    pub fn s0_apply(&self, xi: &HsVector) -> Result<HsVector> {
        Ok(conj_j(&self.modular_power(0.5, xi)?))
    }

    /// Araki Hamiltonian `−ln Δ₀ : ξ ↦ Lξ − ξL` with `L = −ln ρ`.
    pub fn log_modular_generator(&self) -> SuperOperator {
        let l = linalg::diag_real(&self.log_weights().iter().map(|x| -x).collect::<Vec<_>>());
        let n = self.dim();
        let mut op = SuperOperator::new(n);
        op.push(l.clone(), linalg::identity(n));
        op.push(-linalg::identity(n), l);
        op
    }

    /// `i₀(C)` for a given `0 ⪯ C ⪯ I`; lies in the order interval `[0, ξ₀]`.
    pub fn order_interval_point(&self, c: &CMatrix) -> Result<HsVector> {
        self.embed(c)
    }
}

fn extreme_indices(values: &[f64]) -> (usize, usize) {
    let mut hi = 0;
    let mut lo = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[hi] {
            hi = i;
        }
        if *v < values[lo] {
            lo = i;
        }
    }
    (hi, lo)
}

/// Random point of `[0, ξ₀]`: `ξ₀^{1/2} C ξ₀^{1/2}` with `C = U diag(c) U*`, `c ∈ [0,1]`.
pub fn sample_order_interval(ctx: &StandardFormContext, seed: u64) -> HsVector {
    let mut rng = linalg::rng(seed);
    let n = ctx.dim();
    let u = linalg::random_unitary(n, &mut rng);
    let c: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let cm = &u * linalg::diag_real(&c) * u.adjoint();
    ctx.embed(&linalg::hermitian_part(&cm))
        .expect("sample has context dimension")
}

/// Random positive semidefinite vector with unit Hilbert–Schmidt norm.
pub fn sample_positive(dim: usize, seed: u64) -> HsVector {
    let mut rng = linalg::rng(seed);
    let g = linalg::complex_gaussian(dim, &mut rng);
    let p = &g * g.adjoint();
    let n = p.norm();
    HsVector(p / re(n))
}

/// Gaussian Hermitian vector with unit Hilbert–Schmidt norm.
pub fn sample_hermitian(dim: usize, seed: u64) -> HsVector {
    HsVector(linalg::hermitian_unit(dim, &mut linalg::rng(seed)))
}

/// Complex Gaussian vector with unit Hilbert–Schmidt norm.
pub fn sample_general(dim: usize, seed: u64) -> HsVector {
    let g = linalg::complex_gaussian(dim, &mut linalg::rng(seed));
    let n = g.norm();
    HsVector(g / re(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{FockSpec, Profile};
    use crate::linalg::{identity, sample_seed};

    fn ctx(dim: usize, beta: f64) -> StandardFormContext {
        StandardFormContext::from_spec(&FockSpec::linear(dim, beta).unwrap()).unwrap()
    }

    #[test]
    fn inner_product_basics() {
        let i4 = HsVector::new(identity(4));
        assert_eq!(hs_inner(&i4, &i4).unwrap(), re(4.0));
        let c = ctx(6, 0.8);
        assert!((hs_inner(c.xi0(), c.xi0()).unwrap() - re(1.0)).norm() < 1e-15);
        let a = sample_general(5, 1);
        let b = sample_general(5, 2);
        let ab = hs_inner(&a, &b).unwrap();
        let ba = hs_inner(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-15);
        assert!(hs_inner(&a, &HsVector::zeros(4)).is_err());
    }

    #[test]
    fn embedding_of_unit_is_xi0() {
        let c = ctx(8, 1.3);
        let e = c.embed(&identity(8)).unwrap();
        assert!((&e - c.xi0()).norm() < 1e-15);
    }

    #[test]
    fn embedding_round_trip_and_order() {
        let c = ctx(8, 1.0);
        for s in 0..100 {
            let mut r = linalg::rng(sample_seed(11, s));
            let u = linalg::random_unitary(8, &mut r);
            let d: Vec<f64> = (0..8).map(|_| r.random::<f64>()).collect();
            let x = &u * linalg::diag_real(&d) * u.adjoint();
            let e = c.embed(&x).unwrap();
            assert!(e.in_cone());
            assert!((c.xi0() - &e).in_cone());
            let back = c.unembed(&e).unwrap();
            assert!(back.warning.is_none());
            assert!((back.matrix - &x).norm() < 1e-10);
        }
    }

    #[test]
    fn unembed_warns_when_ill_conditioned() {
        let c = ctx(12, 8.0);
        let r = c.unembed(c.xi0()).unwrap();
        assert!(r.warning.is_some());
    }

    #[test]
    fn modular_power_linear_profile() {
        let beta = 0.9;
        let c = ctx(5, beta);
        let xi = sample_general(5, 3);
        assert_eq!(c.modular_power(0.0, &xi).unwrap(), xi);
        let s = 0.3;
        let out = c.modular_power(s, &xi).unwrap();
        for j in 0..5 {
            for k in 0..5 {
                let f = (-beta * s * (j as f64 - k as f64)).exp();
                assert!((out.matrix()[(j, k)] - xi.matrix()[(j, k)] * f).norm() < 1e-14);
            }
        }
        let back = c.modular_power(-s, &out).unwrap();
        assert!((&back - &xi).norm() < 1e-12);
        assert!(c.modular_power(1.5, &xi).is_err());
    }

    #[test]
    fn modular_power_conditioning_names_indices() {
        let spec = FockSpec::new(4, Profile::Table { values: vec![0.0, 1.0, 2.0, 360.0] }, 2.0).unwrap();
        let c = StandardFormContext::from_spec(&spec);
        match c {
            Err(Error::Conditioning { row, col, .. }) => assert_eq!((row, col), (0, 3)),
            other => panic!("expected conditioning error, got {other:?}"),
        }
        let spec = FockSpec::new(4, Profile::Table { values: vec![0.0, 1.0, 2.0, 300.0] }, 2.0).unwrap();
        let c = StandardFormContext::from_spec(&spec).unwrap();
        assert!(c.modular_power(1.0, &sample_general(4, 1)).is_ok());
    }

    #[test]
    fn modular_unitary_is_isometric_and_periodic() {
        let beta = 1.7;
        let c = ctx(6, beta);
        let xi = sample_general(6, 9);
        assert_eq!(c.modular_unitary(0.0, &xi), xi);
        assert!((c.modular_unitary(7.3, &xi).norm() - xi.norm()).abs() < 1e-14);
        let period = 2.0 * std::f64::consts::PI / beta;
        let shifted = c.modular_unitary(1.1 + period, &xi);
        assert!((&shifted - &c.modular_unitary(1.1, &xi)).norm() < 1e-12);
    }

    #[test]
    fn conjugation_properties() {
        let xi = sample_general(4, 5);
        let eta = sample_general(4, 6);
        assert_eq!(conj_j(&conj_j(&xi)), xi);
        let h = sample_hermitian(4, 2);
        assert_eq!(conj_j(&h), h);
        let z = C64::new(0.3, -1.2);
        assert!((&conj_j(&xi.scale(z)) - &conj_j(&xi).scale(z.conj())).norm() < 1e-15);
        let lhs = hs_inner(&conj_j(&xi), &conj_j(&eta)).unwrap();
        let rhs = hs_inner(&xi, &eta).unwrap().conj();
        assert!((lhs - rhs).norm() < 1e-15);
    }

    #[test]
    fn tomita_map() {
        let c = ctx(6, 0.7);
        let x = linalg::complex_gaussian(6, &mut linalg::rng(4));
        let xxi0 = &x * c.xi0();
        let s = c.s0_apply(&xxi0).unwrap();
        assert!((&s - &(&x.adjoint() * c.xi0())).norm() < 1e-10);
        let xi = sample_general(6, 8);
        let twice = c.s0_apply(&c.s0_apply(&xi).unwrap()).unwrap();
        assert!((&twice - &xi).norm() < 1e-10);
        assert!((&c.s0_apply(c.xi0()).unwrap() - c.xi0()).norm() < 1e-14);
        // closed form ρ^{-1/2} ξ* ρ^{1/2}
        let w = c.weights();
        let closed = CMatrix::from_fn(6, 6, |j, k| xi.matrix()[(k, j)].conj() * (w[k] / w[j]).sqrt());
        assert!((c.s0_apply(&xi).unwrap().matrix() - closed).norm() < 1e-10);
    }

    #[test]
    fn commutant_action() {
        let mut r = linalg::rng(21);
        let y = linalg::complex_gaussian(4, &mut r);
        let z = linalg::complex_gaussian(4, &mut r);
        let xi = sample_general(4, 1);
        assert_eq!(j_action(&identity(4), &xi), xi);
        let lhs = j_action(&y, &j_action(&z, &xi));
        let rhs = j_action(&(&y * &z), &xi);
        assert!((&lhs - &rhs).norm() < 1e-14);
        let a = &z * &j_action(&y, &xi);
        let b = j_action(&y, &(&z * &xi));
        assert!((&a - &b).norm() < 1e-14);
    }

    #[test]
    fn jordan_decomposition() {
        let xi = HsVector::new(linalg::diag_real(&[2.0, -3.0]));
        let p = jordan_decompose(&xi).unwrap();
        assert!((p.plus.matrix() - linalg::diag_real(&[2.0, 0.0])).norm() < 1e-14);
        assert!((p.minus.matrix() - linalg::diag_real(&[0.0, 3.0])).norm() < 1e-14);
        assert!(jordan_decompose(&sample_general(3, 1)).is_err());

        for s in 0..20 {
            let h = sample_hermitian(6, sample_seed(5, s));
            let x = linalg::complex_gaussian(6, &mut linalg::rng(sample_seed(6, s)));
            let p = jordan_decompose(&h).unwrap();
            assert!((&(&p.plus - &p.minus) - &h).norm() < 1e-12);
            assert!((p.plus.matrix() * p.minus.matrix()).norm() < 1e-12);
            // modulus invariance of |X·|
            let lhs = (&x * &p.abs).norm();
            let rhs = (&x * &h).norm();
            assert!((lhs - rhs).abs() < 1e-12);
            // cross term positivity Tr(ξ₊ X* ξ₋ X) >= 0
            let cross = (p.plus.matrix() * x.adjoint() * p.minus.matrix() * &x).trace();
            assert!(cross.re >= -1e-12);
        }
    }

    #[test]
    fn order_interval_samples() {
        let c = ctx(7, 1.0);
        for s in 0..10 {
            let xi = sample_order_interval(&c, s);
            assert!(linalg::min_eigenvalue(xi.matrix()) >= -1e-14);
            assert!(linalg::min_eigenvalue((c.xi0() - &xi).matrix()) >= -1e-14);
        }
        assert_eq!(sample_order_interval(&c, 3), sample_order_interval(&c, 3));
        let zero = c.order_interval_point(&CMatrix::zeros(7, 7)).unwrap();
        assert_eq!(zero.norm(), 0.0);
        let full = c.order_interval_point(&identity(7)).unwrap();
        assert!((&full - c.xi0()).norm() < 1e-15);
    }

    #[test]
    fn araki_hamiltonian_spectrum_is_beta_integers() {
        let beta = 0.6;
        let dim = 5;
        let c = ctx(dim, beta);
        let h = c.log_modular_generator();
        let eig = linalg::eigvalsh(h.dense());
        for e in &eig {
            let k = e / beta;
            assert!((k - k.round()).abs() < 1e-10);
            assert!(k.round().abs() <= (dim - 1) as f64);
        }
        for k in -(dim as i64 - 1)..=(dim as i64 - 1) {
            assert!(eig.iter().any(|e| (e - beta * k as f64).abs() < 1e-10), "missing {k}");
        }
    }
}
