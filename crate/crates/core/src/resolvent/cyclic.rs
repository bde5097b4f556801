use crate::error::{Error, Result};
use crate::C64;

/// Default guard on `|μ^m - 1|` below which a cyclic block is treated as singular.
pub const SINGULARITY_GUARD: f64 = 1e-14;

/// `(μI - C_m)^{-1} = Σ_j c_j C_m^j` with `c_j = μ^{m-1-j} / (μ^m - 1)`, where
/// `C_m` is the cyclic shift `e_i ↦ e_{i+1 mod m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicResolvent {
    mu: C64,
    coeffs: Vec<C64>,
}

impl CyclicResolvent {
    pub fn new(m: usize, mu: C64, guard: f64) -> Result<Self> {
        assert!(m >= 1, "cyclic block of size zero");
        let mu_m = mu.powu(m as u32);
        let gap = (mu_m - 1.0).norm();
        if gap <= guard || !gap.is_finite() {
            return Err(Error::Singular { mu, gap });
        }
        let denom = mu_m - 1.0;
        let coeffs = (0..m)
            .map(|j| mu.powu((m - 1 - j) as u32) / denom)
            .collect();
        Ok(Self { mu, coeffs })
    }

    pub fn size(&self) -> usize {
        self.coeffs.len()
    }

    pub fn mu(&self) -> C64 {
        self.mu
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// `Σ_j c_j C^j x`, i.e. `out_i = Σ_j c_j x_{i-j mod m}`.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let m = self.size();
        assert_eq!(x.len(), m);
        (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| self.coeffs[j] * x[(i + m - j) % m])
                    .sum()
            })
            .collect()
    }

    /// Operator norm on `(C^m, ‖·‖_1)`: every column is a permutation of the coefficients.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }
}
