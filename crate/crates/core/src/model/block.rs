use std::collections::BTreeMap;

use crate::certified::CertifiedComplex;
use crate::error::{Error, Result};
use crate::model::weights::WeightSeq;
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Shape of a structured tail `n ↦ c_n 𝟙`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailShape {
    /// `c_n = q_n`.
    Weight,
    /// `c_n = q_n / (λ - 1 + q_n)^power`.
    ResolventPower { lambda: C64, power: u32 },
}

/// One closed-form tail component, `coeff · shape(n) · 𝟙` in every block `n >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailTerm {
    pub coeff: C64,
    pub shape: TailShape,
}

/// Distance from the point `z` to the real segment `[0, hi]`.
fn distance_to_segment(z: C64, hi: f64) -> f64 {
    if (0.0..=hi).contains(&z.re) {
        z.im.abs()
    } else {
        z.norm().min((z - hi).norm())
    }
}

impl TailTerm {
    pub fn weight(coeff: C64) -> Self {
        Self {
            coeff,
            shape: TailShape::Weight,
        }
    }

    /// Scalar multiple of `𝟙` carried by block `n`.
    pub fn value(&self, w: &WeightSeq, n: usize) -> C64 {
        let q = w.q(n);
        match self.shape {
            TailShape::Weight => self.coeff * q,
            TailShape::ResolventPower { lambda, power } => {
                self.coeff * q / (lambda - 1.0 + q).powu(power)
            }
        }
    }

    /// Bound on `sup_{n > depth} |c_n| / q_n`; infinite when no bound is available.
    fn factor_beyond(&self, w: &WeightSeq, depth: usize) -> f64 {
        match self.shape {
            TailShape::Weight => self.coeff.norm(),
            TailShape::ResolventPower { lambda, power } => {
                let dist = distance_to_segment(1.0 - lambda, w.q(depth + 1));
                if dist == 0.0 {
                    f64::INFINITY
                } else {
                    self.coeff.norm() / dist.powi(power as i32)
                }
            }
        }
    }

    /// Bound on `Σ_{n > depth} ‖c_n 𝟙‖_1`.
    pub fn l1_beyond(&self, w: &WeightSeq, depth: usize) -> f64 {
        if self.coeff == ZERO {
            return 0.0;
        }
        // ‖q_n 𝟙‖_1 = d q_n, and Σ_{n>N} d q_n is the weight tail.
        self.factor_beyond(w, depth) * w.tail(depth)
    }

    /// Bound on `sup_{n > depth} ‖c_n 𝟙‖_∞`.
    pub fn sup_beyond(&self, w: &WeightSeq, depth: usize) -> f64 {
        if self.coeff == ZERO {
            return 0.0;
        }
        self.factor_beyond(w, depth) * w.q(depth + 1)
    }
}

/// An element of `E = C ⊕ (C^d)^N` with ℓ¹ norm `|f_0| + Σ ‖f_n‖_1`.
///
/// Block `n` equals the tabulated dense vector (zero if absent) plus the sum
/// of all tail terms evaluated at `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    dim: usize,
    pub head: C64,
    blocks: BTreeMap<usize, Vec<C64>>,
    tail: Vec<TailTerm>,
}

impl BlockVector {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            head: ZERO,
            blocks: BTreeMap::new(),
            tail: Vec::new(),
        }
    }

    /// The head unit vector `e`.
    pub fn e(dim: usize) -> Self {
        let mut v = Self::zero(dim);
        v.head = C64::new(1.0, 0.0);
        v
    }

    /// The weight vector `q = (0, q_1 𝟙, q_2 𝟙, …)`.
    pub fn q(dim: usize) -> Self {
        let mut v = Self::zero(dim);
        v.tail.push(TailTerm::weight(C64::new(1.0, 0.0)));
        v
    }

    /// Unit vector at coordinate `i` of block `n`.
    pub fn unit(dim: usize, n: usize, i: usize) -> Self {
        let mut v = Self::zero(dim);
        let mut b = vec![ZERO; dim];
        b[i] = C64::new(1.0, 0.0);
        v.set_block(n, b);
        v
    }

    pub fn with_tail(mut self, term: TailTerm) -> Self {
        self.tail.push(term);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tail_terms(&self) -> &[TailTerm] {
        &self.tail
    }

    /// Tabulated blocks (without tail contributions).
    pub fn tabulated(&self) -> impl Iterator<Item = (usize, &[C64])> {
        self.blocks.iter().map(|(&n, b)| (n, b.as_slice()))
    }

    pub fn is_exact(&self) -> bool {
        self.tail.is_empty()
    }

    /// Largest tabulated block index, or 0.
    pub fn support_end(&self) -> usize {
        self.blocks.keys().next_back().copied().unwrap_or(0)
    }

    pub fn set_block(&mut self, n: usize, block: Vec<C64>) {
        assert!(n >= 1, "block indices start at 1");
        assert_eq!(block.len(), self.dim, "block length must equal d");
        self.blocks.insert(n, block);
    }

    /// Block `n` including tail contributions.
    pub fn block(&self, w: &WeightSeq, n: usize) -> Vec<C64> {
        let mut b = self
            .blocks
            .get(&n)
            .cloned()
            .unwrap_or_else(|| vec![ZERO; self.dim]);
        let c: C64 = self.tail.iter().map(|t| t.value(w, n)).sum();
        if c != ZERO {
            b.iter_mut().for_each(|x| *x += c);
        }
        b
    }

    /// Tail coefficient `c_n` (the untabulated part of block `n` is `c_n 𝟙`).
    pub fn tail_coefficient(&self, w: &WeightSeq, n: usize) -> C64 {
        self.tail.iter().map(|t| t.value(w, n)).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            head: self.head * s,
            blocks: self
                .blocks
                .iter()
                .map(|(&n, b)| (n, b.iter().map(|x| x * s).collect()))
                .collect(),
            tail: self
                .tail
                .iter()
                .map(|t| TailTerm {
                    coeff: t.coeff * s,
                    shape: t.shape,
                })
                .collect(),
        }
    }

    /// `self + alpha · other`.
    pub fn add_scaled(&self, alpha: C64, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "block dimensions differ");
        let mut out = self.clone();
        out.head += alpha * other.head;
        for (&n, b) in &other.blocks {
            let dst = out.blocks.entry(n).or_insert_with(|| vec![ZERO; self.dim]);
            dst.iter_mut().zip(b).for_each(|(x, y)| *x += alpha * y);
        }
        for t in &other.tail {
            let scaled = TailTerm {
                coeff: t.coeff * alpha,
                shape: t.shape,
            };
            match out.tail.iter_mut().find(|s| s.shape == t.shape) {
                Some(s) => s.coeff += scaled.coeff,
                None => out.tail.push(scaled),
            }
        }
        out.tail.retain(|t| t.coeff != ZERO);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(C64::new(-1.0, 0.0), other)
    }

    /// Exact vector holding blocks `1..=max(depth, support_end)`; the tail beyond is dropped.
    pub fn truncate(&self, w: &WeightSeq, depth: usize) -> Self {
        if self.tail.is_empty() {
            return self.clone();
        }
        let end = depth.max(self.support_end());
        let mut out = Self::zero(self.dim);
        out.head = self.head;
        for n in 1..=end {
            out.blocks.insert(n, self.block(w, n));
        }
        out
    }

    /// Bound on `Σ_{n > depth} ‖f_n‖_1`; valid for `depth >= support_end()`.
    pub fn l1_beyond(&self, w: &WeightSeq, depth: usize) -> f64 {
        debug_assert!(depth >= self.support_end());
        self.tail.iter().map(|t| t.l1_beyond(w, depth)).sum()
    }

    /// Bound on `sup_{n > depth} ‖f_n‖_∞`; valid for `depth >= support_end()`.
    pub fn sup_beyond(&self, w: &WeightSeq, depth: usize) -> f64 {
        debug_assert!(depth >= self.support_end());
        self.tail.iter().map(|t| t.sup_beyond(w, depth)).sum()
    }

    /// Smallest depth `>= start` at which `bound(depth) <= target`, doubling up to a cap.
    fn settle_depth(&self, start: usize, target: f64, bound: impl Fn(usize) -> f64) -> (usize, f64) {
        let mut depth = start.max(self.support_end()).max(1);
        let mut b = bound(depth);
        while b > target && depth < MAX_EXPANSION {
            depth = (depth * 2).min(MAX_EXPANSION);
            b = bound(depth);
        }
        (depth, b)
    }

    /// Certified ℓ¹ norm with radius at most `accuracy`.
    pub fn norm1(&self, w: &WeightSeq, accuracy: f64) -> Result<CertifiedComplex> {
        if accuracy <= 0.0 {
            return Err(Error::Invalid("norm1: accuracy must be positive".into()));
        }
        if self.tail.is_empty() {
            let v = self.head.norm()
                + self
                    .blocks
                    .values()
                    .map(|b| b.iter().map(|x| x.norm()).sum::<f64>())
                    .sum::<f64>();
            return Ok(CertifiedComplex::real(v, 0.0));
        }
        let (depth, radius) = self.settle_depth(1, accuracy, |n| self.l1_beyond(w, n));
        if radius > accuracy {
            return Err(Error::CheckFailed(format!(
                "norm1: tail bound {radius:e} above requested accuracy {accuracy:e} at depth {depth}"
            )));
        }
        let v = self.head.norm()
            + (1..=depth)
                .map(|n| self.block(w, n).iter().map(|x| x.norm()).sum::<f64>())
                .sum::<f64>();
        Ok(CertifiedComplex::real(v, radius))
    }

    /// Bilinear pairing `⟨φ, f⟩ = φ_0 f_0 + Σ_n ⟨φ_n, f_n⟩` with `self` read as `φ`,
    /// summed explicitly through at least block `depth`.
    pub fn pair(&self, f: &BlockVector, w: &WeightSeq, depth: usize) -> CertifiedComplex {
        assert_eq!(self.dim, f.dim, "block dimensions differ");
        let start = depth.max(self.support_end()).max(f.support_end());
        let bound = |n: usize| {
            let a = self.sup_beyond(w, n);
            let b = f.l1_beyond(w, n);
            if a == 0.0 || b == 0.0 {
                0.0
            } else {
                a * b
            }
        };
        // Expand only when the bound is unusable (a pole of a resolvent tail lies ahead).
        let (n_max, radius) = self.settle_depth(start, f64::MAX, bound);
        let n_max = n_max.max(start);
        let mut acc = self.head * f.head;
        if self.tail.is_empty() && f.tail.is_empty() {
            for (n, phi) in &self.blocks {
                if let Some(b) = f.blocks.get(n) {
                    acc += phi.iter().zip(b).map(|(x, y)| x * y).sum::<C64>();
                }
            }
            return CertifiedComplex::exact(acc);
        }
        for n in 1..=n_max {
            let phi = self.block(w, n);
            let b = f.block(w, n);
            acc += phi.iter().zip(&b).map(|(x, y)| x * y).sum::<C64>();
        }
        CertifiedComplex::new(acc, radius)
    }

    /// Whether every entry is a non-negative real number.
    pub fn is_nonnegative(&self) -> bool {
        let nonneg = |x: &C64| x.im == 0.0 && x.re >= 0.0;
        nonneg(&self.head)
            && self.blocks.values().all(|b| b.iter().all(nonneg))
            && self
                .tail
                .iter()
                .all(|t| t.shape == TailShape::Weight && nonneg(&t.coeff))
    }
}

const MAX_EXPANSION: usize = 1 << 14;
