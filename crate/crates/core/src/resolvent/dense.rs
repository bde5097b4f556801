//! Dense complex matrices plugged into the rank-one combinator.

use nalgebra::{DMatrix, DVector};

use crate::certified::CertifiedComplex;
use crate::error::{Error, Result};
use crate::resolvent::sherman_morrison::{Functional, LinearSpace, ResolventAction};
use crate::C64;

impl LinearSpace for DVector<C64> {
    fn add_scaled(&self, alpha: C64, other: &Self) -> Self {
        self + other * alpha
    }
}

/// A dense vector read as the bilinear functional `v ↦ Σ φ_i v_i`.
#[derive(Debug, Clone)]
pub struct DenseFunctional(pub DVector<C64>);

impl Functional<DVector<C64>> for DenseFunctional {
    fn pair(&self, v: &DVector<C64>) -> CertifiedComplex {
        CertifiedComplex::exact(self.0.iter().zip(v.iter()).map(|(a, b)| a * b).sum())
    }
}

/// `f ↦ (λ - A)^{-1} f` by LU factorization.
pub struct DenseResolvent {
    lambda: C64,
    lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl DenseResolvent {
    pub fn new(a: &DMatrix<C64>, lambda: C64) -> Result<Self> {
        let n = a.nrows();
        let shifted = DMatrix::from_diagonal_element(n, n, lambda) - a;
        let lu = shifted.lu();
        if !lu.is_invertible() {
            return Err(Error::Invalid(format!("lambda = {lambda} is an eigenvalue")));
        }
        Ok(Self { lambda, lu })
    }

    /// The full inverse `(λ - A)^{-1}`.
    pub fn inverse(&self) -> Option<DMatrix<C64>> {
        self.lu.try_inverse()
    }
}

impl ResolventAction<DVector<C64>> for DenseResolvent {
    fn lambda(&self) -> C64 {
        self.lambda
    }

    fn apply(&self, f: &DVector<C64>) -> Result<DVector<C64>> {
        self.lu
            .solve(f)
            .ok_or_else(|| Error::Invalid("singular dense resolvent".into()))
    }
}

/// Matrix of a resolvent action, column by column.
pub fn action_matrix(r: &impl ResolventAction<DVector<C64>>, n: usize) -> Result<DMatrix<C64>> {
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = DVector::zeros(n);
        e[j] = C64::new(1.0, 0.0);
        m.set_column(j, &r.apply(&e)?);
    }
    Ok(m)
}
