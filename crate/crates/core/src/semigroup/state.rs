use std::collections::BTreeMap;
use std::f64::consts::TAU;

use crate::model::WeightSeq;
use crate::C64;

/// A finitely supported element of `C ⊕ L¹(𝕋) ⊕ L¹(𝕋) ⊕ …` in Fourier
/// coordinates: block `n` is `θ ↦ Σ_k f_nk e^{ikθ}`, and `𝟙` has mass `2π`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FourierState {
    pub head: C64,
    pub blocks: BTreeMap<usize, BTreeMap<i64, C64>>,
}

impl FourierState {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn e() -> Self {
        Self {
            head: C64::new(1.0, 0.0),
            ..Self::default()
        }
    }

    /// `q` on blocks `1..=depth`: mode-0 coefficient `q_n`.
    pub fn q(w: &WeightSeq, depth: usize) -> Self {
        let mut s = Self::zero();
        for n in 1..=depth {
            s.set(n, 0, C64::new(w.q(n), 0.0));
        }
        s
    }

    pub fn mode(n: usize, k: i64, coeff: C64) -> Self {
        let mut s = Self::zero();
        s.set(n, k, coeff);
        s
    }

    pub fn get(&self, n: usize, k: i64) -> C64 {
        self.blocks
            .get(&n)
            .and_then(|b| b.get(&k))
            .copied()
            .unwrap_or_default()
    }

    pub fn set(&mut self, n: usize, k: i64, coeff: C64) {
        assert!(n >= 1, "block indices start at 1");
        self.blocks.entry(n).or_default().insert(k, coeff);
    }

    pub fn modes(&self) -> impl Iterator<Item = (usize, i64, C64)> + '_ {
        self.blocks
            .iter()
            .flat_map(|(&n, b)| b.iter().map(move |(&k, &c)| (n, k, c)))
    }

    /// Applies `f` to every coefficient; the head goes through `head`.
    pub fn map_modes(&self, head: impl Fn(C64) -> C64, f: impl Fn(usize, i64, C64) -> C64) -> Self {
        let mut out = Self {
            head: head(self.head),
            ..Self::default()
        };
        for (n, k, c) in self.modes() {
            out.set(n, k, f(n, k, c));
        }
        out
    }

    pub fn add_scaled(&self, alpha: C64, other: &Self) -> Self {
        let mut out = self.clone();
        out.head += alpha * other.head;
        for (n, k, c) in other.modes() {
            *out.blocks.entry(n).or_default().entry(k).or_default() += alpha * c;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(C64::new(-1.0, 0.0), other)
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map_modes(|h| h * s, |_, _, c| c * s)
    }

    /// `⟨q, f⟩ = Σ_n q_n 2π f_n0`; modes `k ≠ 0` integrate to zero.
    pub fn pair_q(&self, w: &WeightSeq) -> C64 {
        self.blocks
            .iter()
            .map(|(&n, b)| w.mass(n) * b.get(&0).copied().unwrap_or_default())
            .sum()
    }

    /// `|head| + Σ_n 2π Σ_k |f_nk|`: the norm when each block holds at most
    /// one mode, an upper bound otherwise.
    pub fn norm(&self) -> f64 {
        self.head.norm()
            + self
                .blocks
                .values()
                .map(|b| TAU * b.values().map(|c| c.norm()).sum::<f64>())
                .sum::<f64>()
    }

    /// `head + Σ_n 2π f_n0`, the pairing with the constant functional.
    pub fn mass(&self) -> C64 {
        self.head
            + self
                .blocks
                .values()
                .map(|b| TAU * b.get(&0).copied().unwrap_or_default())
                .sum::<C64>()
    }

    /// `2π f_n0` for `n = 1..=depth`.
    pub fn block_masses(&self, depth: usize) -> Vec<C64> {
        (1..=depth).map(|n| TAU * self.get(n, 0)).collect()
    }

    pub fn max_block(&self) -> usize {
        self.blocks.keys().next_back().copied().unwrap_or(0)
    }
}
