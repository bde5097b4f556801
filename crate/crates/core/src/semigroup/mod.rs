//! A stochastic C₀-semigroup on `C ⊕ L¹(𝕋) ⊕ L¹(𝕋) ⊕ …` whose generator
//! has spectrum `i(-∞,-1] ∪ {0} ∪ i[1,∞)` on the imaginary axis.

pub mod evolve;
pub mod generator;
pub mod rational;
pub mod state;

pub use evolve::{evolve, trajectory, uniform_times, Propagator, TrajectoryRow, DEFAULT_CHAIN_DEPTH};
pub use generator::{
    default_beta_grid, default_cert_points, AxisPoint, AxisReport, GeneratorSpec, SgCertificate,
};
pub use rational::{parse_rational, Rational, RationalEnum};
pub use state::FourierState;
