//! Certified spectral computations for two explicit positive operators:
//! an irreducible stochastic operator on ℓ¹ whose peripheral spectrum is a
//! prescribed finite union of finite subgroups of the unit circle, and an
//! irreducible stochastic C₀-semigroup generator whose spectrum on the
//! imaginary axis is `i(-∞,-1] ∪ {0} ∪ i[1,∞)`.
//!
//! Spectral-set membership is decided by closed-form resolvents, rank-one
//! (Sherman–Morrison) updates and truncated sums carrying rigorous tail
//! radii. Spectral values are exhibited by explicit approximate
//! eigenvectors. Finite sections are analysed through their secular
//! equation.

pub mod certified;
pub mod cli;
pub mod error;
pub mod io;
pub mod model;
pub mod resolvent;
pub mod scanner;
pub mod semigroup;
pub mod truncation;
pub mod verify;

pub use certified::CertifiedComplex;
pub use error::{Error, Result};
pub use model::{BlockVector, GroupUnionSpec, RootOfUnity, WeightRule, WeightSeq};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Default truncation depth for certified sums (tail radius `2^-40`).
pub const DEFAULT_DEPTH: usize = 40;
