//! Exact construction and verification of a cusped hyperbolic 4-manifold
//! with Euler characteristic 2, glued from five copies of a 22-facet
//! polytope built from a Coxeter polytope in H^4.
//!
//! The geometry is done over the real field Q(√2, √7) with exact signs, the
//! arithmetic invariants over Q.

pub mod cli;
pub mod coxeter;
pub mod error;
pub mod exactnum;
pub mod gluing;
pub mod linalg;
pub mod lorentz;
pub mod polytope;
pub mod qforms;
pub mod scalar;

pub use error::{Error, Result};
pub use exactnum::FieldElement;
pub use scalar::{ExactScalar, Scalar, Sign};

/// Arbitrary-precision rational.
pub type Rational = num_rational::BigRational;
/// Vector in R^{1,4} over Q(√2, √7).
pub type Vector = lorentz::LorentzVector<FieldElement>;
/// Isometry of R^{1,4} over Q(√2, √7).
pub type Isometry = lorentz::IsometryMatrix<FieldElement>;
/// Square matrix over Q(√2, √7).
pub type FieldMatrix = linalg::Matrix<FieldElement>;
/// Square matrix over Q.
pub type RationalMatrix = linalg::Matrix<Rational>;
