//! Closed-form resolvents and the rank-one update machinery.

pub mod cyclic;
pub mod dense;
pub mod sherman_morrison;
pub mod single;

pub use cyclic::{CyclicResolvent, SINGULARITY_GUARD};
pub use sherman_morrison::{Functional, LinearSpace, RankOneUpdate, ResolventAction, ShermanMorrison};
pub use single::{
    circles_inequality, denominator_t, distance_to_spectrum_of_s, empirical_block_bound, g_scalar,
    resolvent_s, resolvent_t, BlockFunctional, ResolventS, ResolventT,
};
