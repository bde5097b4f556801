//! Finite sections `T_N` and their spectra.

pub mod cofactor;
pub mod graph;
pub mod roots;
pub mod secular;
pub mod section;
pub mod spectrum;

pub use cofactor::{det_by_expansion, factorization_cross_check, FactorizationCheck};
pub use graph::{strongly_connected, tarjan_scc};
pub use secular::{secular_function, SecularFunction};
pub use section::{build_tn, section_weights, FiniteOperator, SectionChecks};
pub use spectrum::{
    eigs_via_secular, spectrum_convergence, spectrum_of, ConvergenceRow, ConvergenceTable, EigenKind, Eigenvalue,
    SpectrumResult,
};
