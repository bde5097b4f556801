//! Resolvent of a rank-one perturbation.
//!
//! For `λ` in the resolvent set of `A`, `γ = ⟨φ, R(λ,A) w⟩` decides whether `λ`
//! stays in the resolvent set of `A + φ⊗w`, where `(φ⊗w) f = ⟨φ, f⟩ w`; if
//! `γ ≠ 1`,
//!
//! `R(λ, A + φ⊗w) f = R(λ,A) f + ⟨φ, R(λ,A) f⟩ / (1 - γ) · R(λ,A) w`.
//!
//! The combinator is generic so the same code serves block vectors with
//! certified pairings and dense matrices in the oracle tests.

use crate::certified::CertifiedComplex;
use crate::error::{Error, Result, SingularCause};
use crate::C64;

pub trait LinearSpace: Clone {
    /// `self + alpha · other`.
    fn add_scaled(&self, alpha: C64, other: &Self) -> Self;
}

/// A bounded linear functional on `V`, evaluated with a certified radius.
pub trait Functional<V> {
    fn pair(&self, v: &V) -> CertifiedComplex;
}

/// The action `f ↦ R(λ, A) f` of a resolvent at a fixed `λ`.
pub trait ResolventAction<V> {
    fn lambda(&self) -> C64;
    fn apply(&self, f: &V) -> Result<V>;
}

impl<V, R: ResolventAction<V> + ?Sized> ResolventAction<V> for &R {
    fn lambda(&self) -> C64 {
        (**self).lambda()
    }
    fn apply(&self, f: &V) -> Result<V> {
        (**self).apply(f)
    }
}

/// The perturbation `φ⊗w`.
#[derive(Debug, Clone)]
pub struct RankOneUpdate<V, F> {
    /// `w`
    pub vector: V,
    /// `φ`
    pub functional: F,
}

/// Resolvent action of `A + φ⊗w`, built from that of `A`.
#[derive(Debug, Clone)]
pub struct ShermanMorrison<V, F, R> {
    base: R,
    update: RankOneUpdate<V, F>,
    resolved_vector: V,
    gamma: CertifiedComplex,
    factor: C64,
}

/// Tolerance on `|γ - 1|` used for block-vector computations.
pub const DEFAULT_GAMMA_TOL: f64 = 1e-12;

impl<V, F, R> ShermanMorrison<V, F, R>
where
    V: LinearSpace,
    F: Functional<V>,
    R: ResolventAction<V>,
{
    /// Fails with [`Error::SingularUpdate`] when `|γ - 1| <= radius + tol`.
    pub fn new(base: R, update: RankOneUpdate<V, F>, tol: f64) -> Result<Self> {
        let resolved_vector = base.apply(&update.vector)?;
        let gamma = update.functional.pair(&resolved_vector);
        let gap = (gamma.value - 1.0).norm();
        if gap <= gamma.radius + tol {
            let cause = if gap <= tol {
                SingularCause::ValueAtOne
            } else {
                SingularCause::RadiusDominated
            };
            return Err(Error::SingularUpdate { gamma, cause });
        }
        let factor = (1.0 - gamma.value).inv();
        Ok(Self {
            base,
            update,
            resolved_vector,
            gamma,
            factor,
        })
    }

    pub fn gamma(&self) -> CertifiedComplex {
        self.gamma
    }

    pub fn base(&self) -> &R {
        &self.base
    }
}

impl<V, F, R> ResolventAction<V> for ShermanMorrison<V, F, R>
where
    V: LinearSpace,
    F: Functional<V>,
    R: ResolventAction<V>,
{
    fn lambda(&self) -> C64 {
        self.base.lambda()
    }

    fn apply(&self, f: &V) -> Result<V> {
        let rf = self.base.apply(f)?;
        let s = self.update.functional.pair(&rf).value * self.factor;
        Ok(rf.add_scaled(s, &self.resolved_vector))
    }
}
