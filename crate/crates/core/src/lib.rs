//! Numerical laboratory for KMS-symmetric Dirichlet forms on type-I standard forms.
//!
//! Everything is realized at finite truncation of the one-mode Fock space:
//! the algebra acts on `dim × dim` matrices, the standard Hilbert space is the
//! Hilbert–Schmidt space of those matrices, and superoperators act on it either
//! structurally (sums of sandwiches `L ξ R`) or through their dense
//! `dim² × dim²` realization.
//!
//! Module map:
//!
//! * [`fock`]: ladder operators, number-operator functional calculus, Gibbs data.
//! * [`standard_form`]: Hilbert–Schmidt vectors, modular objects, symmetric embedding.
//! * [`superop`]: sandwich-term superoperators and their dense realization.
//! * [`dirichlet`]: derivations, forms, generators and their certificates.
//! * [`semigroup`]: spectral semigroups, Markov / CP / superboundedness checks.
//! * [`deformation`]: deformed annihilators built by quadrature and functional calculus.
//! * [`abelian`]: multiplication semigroups on atomic measure spaces.
//! * [`scenario`] and [`output`]: config-driven runner and report emission.

pub mod abelian;
pub mod deformation;
pub mod dirichlet;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod output;
pub mod report;
pub mod scenario;
pub mod semigroup;
pub mod standard_form;
pub mod superop;

pub use error::{Error, Result};
pub use fock::{gibbs_data, ladder, ladder_power, AffiliatedOperator, FockSpec, GibbsData, Profile};
pub use linalg::{CMatrix, C64};
pub use report::{Report, Status};
pub use standard_form::{HsVector, StandardFormContext};
pub use superop::SuperOperator;
