//! The secular function of a finite section.
//!
//! `det(λ - T_N) = det(λ - S_N) · φ_N(λ)` with
//! `φ_N(λ) = 1 - g(λ)/λ`, `g(λ) = Σ_n d q̃_n² / (λ - 1 + q̃_n)`.

use crate::error::{Error, Result};
use crate::model::{GroupUnionSpec, WeightSeq};
use crate::truncation::section::{section_weights, FiniteOperator};
use crate::C64;

/// Distance to a pole below which evaluation is refused.
pub const POLE_GUARD: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct SecularFunction {
    d: usize,
    q: Vec<f64>,
}

impl SecularFunction {
    pub fn new(d: usize, q: Vec<f64>) -> Self {
        assert!(d >= 1);
        Self { d, q }
    }

    pub fn for_section(op: &FiniteOperator) -> Self {
        Self::new(op.spec().dim(), op.section_weights().to_vec())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn section_weights(&self) -> &[f64] {
        &self.q
    }

    /// Poles with multiplicity: `0` once and each `1 - q̃_n` once.
    pub fn poles(&self) -> Vec<f64> {
        let mut p = vec![0.0];
        p.extend(self.q.iter().map(|q| 1.0 - q));
        p
    }

    pub fn nearest_pole(&self, lambda: C64) -> (f64, f64) {
        self.poles()
            .into_iter()
            .map(|p| (p, (lambda - p).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least one pole")
    }

    pub fn g(&self, lambda: C64) -> C64 {
        let d = self.d as f64;
        self.q.iter().map(|&q| d * q * q / (lambda - 1.0 + q)).sum()
    }

    pub fn g_prime(&self, lambda: C64) -> C64 {
        let d = self.d as f64;
        self.q
            .iter()
            .map(|&q| {
                let z = lambda - 1.0 + q;
                -d * q * q / (z * z)
            })
            .sum()
    }

    /// `(φ_N(λ), φ_N'(λ))` without the pole guard.
    pub fn eval_unchecked(&self, lambda: C64) -> (C64, C64) {
        let g = self.g(lambda);
        let gp = self.g_prime(lambda);
        (1.0 - g / lambda, g / (lambda * lambda) - gp / lambda)
    }

    pub fn value(&self, lambda: C64) -> Result<C64> {
        let (pole, distance) = self.nearest_pole(lambda);
        if distance <= POLE_GUARD {
            return Err(Error::PoleHit { pole: C64::new(pole, 0.0), distance });
        }
        Ok(self.eval_unchecked(lambda).0)
    }

    /// `v = e + R(λ, S_N) q`: head 1, block `n` equal to `q̃_n/(λ - 1 + q̃_n) 𝟙`,
    /// normalised to unit ℓ¹ norm. An eigenvector of `T_N` when `φ_N(λ) = 0`.
    pub fn eigenvector(&self, lambda: C64) -> Vec<C64> {
        let mut v = vec![C64::new(1.0, 0.0)];
        for &q in &self.q {
            let c = q / (lambda - 1.0 + q);
            v.extend(std::iter::repeat_n(c, self.d));
        }
        let norm: f64 = v.iter().map(|x| x.norm()).sum();
        v.iter().map(|x| x / norm).collect()
    }
}

/// `φ_N(λ)` for the renormalised section of depth `n`.
pub fn secular_function(spec: &GroupUnionSpec, w: &WeightSeq, n: usize, lambda: C64) -> Result<C64> {
    crate::model::operator::check_weights(spec, w)?;
    if n == 0 {
        return Err(Error::Invalid("N: finite sections need N >= 1".into()));
    }
    SecularFunction::new(spec.dim(), section_weights(w, n, true)).value(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::truncation::section::build_tn;
    use nalgebra::DMatrix;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn setup(orders: &[usize]) -> (GroupUnionSpec, WeightSeq) {
        let s = GroupUnionSpec::new(orders.to_vec()).unwrap();
        let w = WeightSeq::dyadic(s.dim());
        (s, w)
    }

    #[test]
    fn vanishes_at_one_when_renormalised() {
        for orders in [vec![1], vec![2, 3], vec![4, 6]] {
            let (s, w) = setup(&orders);
            for n in 1..=15 {
                assert!(secular_function(&s, &w, n, c(1.0, 0.0)).unwrap().norm() < 1e-15);
            }
        }
    }

    #[test]
    fn scalar_first_section() {
        let (s, w) = setup(&[1]);
        for lambda in [c(0.3, 0.2), c(-2.0, 0.0), c(0.0, 1.5)] {
            let v = secular_function(&s, &w, 1, lambda).unwrap();
            assert!((v - (1.0 - 1.0 / (lambda * lambda))).norm() < 1e-14);
        }
        assert!(secular_function(&s, &w, 1, c(-1.0, 0.0)).unwrap().norm() < 1e-15);
    }

    #[test]
    fn scalar_second_section_hand_arithmetic() {
        let f = SecularFunction::new(1, vec![2.0 / 3.0, 1.0 / 3.0]);
        let g = f.g(c(1.0, 0.0));
        assert!((g - 1.0).norm() < 1e-15);
    }

    #[test]
    fn pole_hit() {
        let (s, w) = setup(&[2, 3]);
        let q1 = section_weights(&w, 3, true)[0];
        assert!(matches!(
            secular_function(&s, &w, 3, c(1.0 - q1, 0.0)),
            Err(Error::PoleHit { .. })
        ));
        assert!(matches!(secular_function(&s, &w, 3, c(0.0, 0.0)), Err(Error::PoleHit { .. })));
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let f = SecularFunction::new(5, section_weights(&WeightSeq::dyadic(5), 6, true));
        for lambda in [c(0.3, 0.4), c(-0.7, 0.1), c(1.2, -0.5)] {
            let h = 1e-6;
            let (_, dp) = f.eval_unchecked(lambda);
            let fd = (f.eval_unchecked(lambda + h).0 - f.eval_unchecked(lambda - h).0) / (2.0 * h);
            assert!((dp - fd).norm() < 1e-6 * dp.norm().max(1.0));
        }
    }

    /// `φ_N(λ) · det(λ - S_N) = det(λ - T_N)` against a dense determinant.
    #[test]
    fn factorises_characteristic_polynomial() {
        let (s, w) = setup(&[2, 3]);
        let op = build_tn(&s, &w, 2, true).unwrap();
        let f = SecularFunction::for_section(&op);
        let n = op.dim();
        let tc = op.matrix().map(|x| c(x, 0.0));
        let mut sn = tc.clone();
        for j in 1..n {
            sn[(0, j)] = c(0.0, 0.0);
            sn[(j, 0)] = c(0.0, 0.0);
        }
        for lambda in [c(0.31, 0.7), c(-0.4, -0.2), c(1.5, 0.3)] {
            let id = DMatrix::<C64>::identity(n, n) * lambda;
            let dt = (&id - &tc).determinant();
            let ds = (&id - &sn).determinant();
            let phi = f.value(lambda).unwrap();
            assert!((dt - ds * phi).norm() < 1e-12 * dt.norm().max(1.0));
        }
    }

    #[test]
    fn eigenvector_at_one_is_perron_vector() {
        let (s, w) = setup(&[2, 3]);
        let op = build_tn(&s, &w, 5, true).unwrap();
        let f = SecularFunction::for_section(&op);
        let v = f.eigenvector(c(1.0, 0.0));
        assert!(v.iter().all(|x| x.re > 0.0 && x.im == 0.0));
        assert!(op.residual(c(1.0, 0.0), &v) < 1e-15);
    }
}
