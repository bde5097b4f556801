use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::operator::check_weights;
use crate::model::{GroupUnionSpec, WeightSeq};
use crate::truncation::graph::strongly_connected;
use crate::C64;

/// The finite section `T_N` on `C ⊕ (C^d)^N`: index 0 is the head, block `n`
/// occupies `1 + (n-1)d .. 1 + nd`.
#[derive(Debug, Clone)]
pub struct FiniteOperator {
    spec: GroupUnionSpec,
    weights: WeightSeq,
    n: usize,
    renormalized: bool,
    q: Vec<f64>,
    matrix: DMatrix<f64>,
}

/// `q̃_n` for `n = 1..=N`, optionally rescaled by `1/(1 - tail(N))`.
pub fn section_weights(w: &WeightSeq, n: usize, renormalize: bool) -> Vec<f64> {
    let scale = if renormalize { 1.0 / (1.0 - w.tail(n)) } else { 1.0 };
    (1..=n).map(|k| w.q(k) * scale).collect()
}

pub fn build_tn(spec: &GroupUnionSpec, w: &WeightSeq, n: usize, renormalize: bool) -> Result<FiniteOperator> {
    check_weights(spec, w)?;
    if n == 0 {
        return Err(Error::Invalid("N: finite sections need N >= 1".into()));
    }
    let d = spec.dim();
    let dim = 1 + n * d;
    let q = section_weights(w, n, renormalize);
    let mut t = DMatrix::zeros(dim, dim);
    let offsets = spec.offsets();
    for (idx, &qn) in q.iter().enumerate() {
        let base = 1 + idx * d;
        for i in 0..d {
            t[(0, base + i)] = qn;
            t[(base + i, 0)] = qn;
        }
        for (&m, &off) in spec.orders().iter().zip(&offsets) {
            for i in 0..m {
                t[(base + off + (i + 1) % m, base + off + i)] += 1.0 - qn;
            }
        }
    }
    Ok(FiniteOperator {
        spec: spec.clone(),
        weights: *w,
        n,
        renormalized: renormalize,
        q,
        matrix: t,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SectionChecks {
    pub dimension: usize,
    pub nonnegative: bool,
    pub min_column_sum: f64,
    pub max_column_sum: f64,
    pub max_column_sum_deviation: f64,
    pub strongly_connected: bool,
}

impl FiniteOperator {
    pub fn spec(&self) -> &GroupUnionSpec {
        &self.spec
    }

    pub fn weights(&self) -> &WeightSeq {
        &self.weights
    }

    pub fn depth(&self) -> usize {
        self.n
    }

    pub fn is_renormalized(&self) -> bool {
        self.renormalized
    }

    /// `q̃_1, …, q̃_N`.
    pub fn section_weights(&self) -> &[f64] {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn column_sums(&self) -> Vec<f64> {
        self.matrix.column_iter().map(|c| c.sum()).collect()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.matrix.iter().all(|&x| x >= 0.0)
    }

    pub fn strongly_connected(&self) -> bool {
        strongly_connected(&self.matrix)
    }

    pub fn checks(&self) -> SectionChecks {
        let sums = self.column_sums();
        let min = sums.iter().copied().fold(f64::INFINITY, f64::min);
        let max = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        SectionChecks {
            dimension: self.dim(),
            nonnegative: self.is_nonnegative(),
            min_column_sum: min,
            max_column_sum: max,
            max_column_sum_deviation: sums.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max),
            strongly_connected: self.strongly_connected(),
        }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim());
        self.matrix
            .row_iter()
            .map(|row| row.iter().zip(v).map(|(a, x)| x * *a).sum())
            .collect()
    }

    /// `‖T_N v - λ v‖_1`.
    pub fn residual(&self, lambda: C64, v: &[C64]) -> f64 {
        self.apply(v)
            .iter()
            .zip(v)
            .map(|(tv, x)| (tv - lambda * x).norm())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::rng::substream;
    use rand::Rng;

    fn section(orders: &[usize], n: usize, renormalize: bool) -> FiniteOperator {
        let s = GroupUnionSpec::new(orders.to_vec()).unwrap();
        let w = WeightSeq::dyadic(s.dim());
        build_tn(&s, &w, n, renormalize).unwrap()
    }

    #[test]
    fn scalar_first_section_is_swap() {
        let t = section(&[1], 1, true);
        assert_eq!(t.matrix(), &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn scalar_second_section() {
        let t = section(&[1], 2, true);
        let q = t.section_weights();
        assert!((q[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((q[1] - 1.0 / 3.0).abs() < 1e-15);
        for s in t.column_sums() {
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn block_layout() {
        let t = section(&[2, 3], 2, false);
        let m = t.matrix();
        let close = |i: usize, j: usize, x: f64| assert!((m[(i, j)] - x).abs() < 1e-16, "({i},{j})");
        assert_eq!(t.dim(), 11);
        // block 1: q_1 = 1/10, shift inside the 2-cycle and the 3-cycle.
        close(0, 1, 0.1);
        close(3, 0, 0.1);
        close(2, 1, 0.9);
        close(1, 2, 0.9);
        close(4, 3, 0.9);
        close(3, 5, 0.9);
        close(6, 0, 0.05);
        close(7, 6, 0.95);
        close(9, 8, 0.95);
        assert_eq!(m[(8, 7)], 0.0);
    }

    #[test]
    fn column_sums() {
        for orders in [vec![1], vec![2, 3], vec![4, 6], vec![3, 3]] {
            for n in 1..=8 {
                let t = section(&orders, n, true);
                let c = t.checks();
                assert!(c.nonnegative && c.strongly_connected);
                assert!(c.max_column_sum_deviation < 1e-12, "{orders:?} N={n}");

                // Only the head column loses mass without renormalization.
                let raw = section(&orders, n, false).column_sums();
                assert!((raw[0] - (1.0 - 0.5f64.powi(n as i32))).abs() < 1e-15);
                assert!(raw[1..].iter().all(|s| (s - 1.0).abs() < 1e-15));
            }
        }
    }

    #[test]
    fn iterates_keep_mass() {
        let t = section(&[2, 3], 6, true);
        let mut rng = substream(7, "section-test");
        let mut f: Vec<C64> = (0..t.dim()).map(|_| C64::new(rng.gen::<f64>(), 0.0)).collect();
        let mass: f64 = f.iter().map(|x| x.re).sum();
        for _ in 0..50 {
            f = t.apply(&f);
            assert!(f.iter().all(|x| x.re >= 0.0));
            let m: f64 = f.iter().map(|x| x.norm()).sum();
            assert!((m - mass).abs() < 1e-10 * mass);
        }
    }

    #[test]
    fn rejects_zero_depth_and_foreign_weights() {
        let s = GroupUnionSpec::new(vec![2]).unwrap();
        assert!(build_tn(&s, &WeightSeq::dyadic(2), 0, true).is_err());
        assert!(build_tn(&s, &WeightSeq::dyadic(3), 2, true).is_err());
    }
}
