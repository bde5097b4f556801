//! The target set, the weight sequence, vectors of `C ⊕ (C^d)^N`, and the
//! forward action of the single operator `T = S + e⊗q + q⊗e`.

mod block;
mod group;
pub(crate) mod operator;
mod weights;

pub use block::{BlockVector, TailShape, TailTerm};
pub use group::{GroupUnionSpec, RootOfUnity};
pub use operator::{apply_t, stochasticity_check, StochasticityReport};
pub use weights::{WeightKind, WeightRule, WeightSeq};
