use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// A root of unity `exp(2πi · num/den)`, stored as a reduced fraction of a turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootOfUnity {
    num: u64,
    den: u64,
}

impl RootOfUnity {
    /// `num/den` of a full turn; reduced modulo 1.
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Invalid("root of unity with zero denominator".into()));
        }
        let num = num % den;
        let g = num.gcd(&den);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    pub fn one() -> Self {
        Self { num: 0, den: 1 }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    /// Fraction of a full turn in `[0, 1)`.
    pub fn turns(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn to_complex(&self) -> C64 {
        match (self.num, self.den) {
            (0, _) => C64::new(1.0, 0.0),
            (1, 2) => C64::new(-1.0, 0.0),
            (1, 4) => C64::new(0.0, 1.0),
            (3, 4) => C64::new(0.0, -1.0),
            _ => C64::from_polar(1.0, std::f64::consts::TAU * self.turns()),
        }
    }

    /// Whether this point is an `m`-th root of unity.
    pub fn is_root_of_order(&self, m: usize) -> bool {
        (m as u64).is_multiple_of(self.den)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.den - self.num, self.den).expect("nonzero denominator")
    }
}

impl fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// The target set `U = G_1 ∪ … ∪ G_n` given by the orders `d_k = |G_k|`.
///
/// Block coordinates of `C^d` are laid out sub-block by sub-block; sub-block
/// `k` carries the cyclic shift `e_i ↦ e_{i+1 mod d_k}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct GroupUnionSpec {
    orders: Vec<usize>,
}

impl TryFrom<Vec<usize>> for GroupUnionSpec {
    type Error = Error;
    fn try_from(orders: Vec<usize>) -> Result<Self> {
        Self::new(orders)
    }
}

impl From<GroupUnionSpec> for Vec<usize> {
    fn from(s: GroupUnionSpec) -> Self {
        s.orders
    }
}

impl GroupUnionSpec {
    pub fn new(orders: Vec<usize>) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::Invalid("orders: list must be non-empty".into()));
        }
        if let Some(bad) = orders.iter().find(|&&d| d == 0) {
            return Err(Error::Invalid(format!("orders: every order must be >= 1, got {bad}")));
        }
        Ok(Self { orders })
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    /// Number of cyclic sub-blocks `K`.
    pub fn groups(&self) -> usize {
        self.orders.len()
    }

    /// Total block dimension `d = d_1 + … + d_n`.
    pub fn dim(&self) -> usize {
        self.orders.iter().sum()
    }

    /// Start offset of each sub-block inside a block of length `d`.
    pub fn offsets(&self) -> Vec<usize> {
        self.orders
            .iter()
            .scan(0, |acc, &d| {
                let o = *acc;
                *acc += d;
                Some(o)
            })
            .collect()
    }

    /// Order of the permutation `P`: the lcm of the orders.
    pub fn period(&self) -> usize {
        self.orders.iter().fold(1, |acc, &d| acc.lcm(&d))
    }

    /// `⋃ G_k`, deduplicated and sorted by angle.
    pub fn union_points(&self) -> Vec<RootOfUnity> {
        let mut pts: Vec<RootOfUnity> = self
            .orders
            .iter()
            .flat_map(|&d| (0..d as u64).map(move |j| RootOfUnity::new(j, d as u64).unwrap()))
            .collect();
        pts.sort_by(|a, b| (a.num * b.den).cmp(&(b.num * a.den)));
        pts.dedup();
        pts
    }

    pub fn contains(&self, u: &RootOfUnity) -> bool {
        self.orders.iter().any(|&d| u.is_root_of_order(d))
    }

    /// Index of the first sub-block whose spectrum contains `u`.
    pub fn first_group_containing(&self, u: &RootOfUnity) -> Option<usize> {
        self.orders.iter().position(|&d| u.is_root_of_order(d))
    }

    /// Euclidean distance from `lambda` to `U`.
    pub fn distance_to_union(&self, lambda: C64) -> f64 {
        self.union_points()
            .iter()
            .map(|u| (lambda - u.to_complex()).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// `P x` for a block vector `x` of length `d`.
    pub fn permute(&self, x: &[C64]) -> Vec<C64> {
        debug_assert_eq!(x.len(), self.dim());
        let mut out = vec![C64::new(0.0, 0.0); x.len()];
        for (&off, &m) in self.offsets().iter().zip(&self.orders) {
            for i in 0..m {
                out[off + (i + 1) % m] = x[off + i];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn angles(spec: &[usize]) -> Vec<(u64, u64)> {
        GroupUnionSpec::new(spec.to_vec())
            .unwrap()
            .union_points()
            .iter()
            .map(|u| (u.num(), u.den()))
            .collect()
    }

    #[test]
    fn union_points_examples() {
        assert_eq!(angles(&[1]), vec![(0, 1)]);
        assert_eq!(angles(&[2, 3]), vec![(0, 1), (1, 3), (1, 2), (2, 3)]);
        assert_eq!(angles(&[2, 2]), vec![(0, 1), (1, 2)]);
        assert_eq!(angles(&[4, 6]).len(), 8);
    }

    #[test]
    fn rejects_bad_orders() {
        assert!(GroupUnionSpec::new(vec![]).is_err());
        assert!(GroupUnionSpec::new(vec![2, 0]).is_err());
        assert!(serde_json::from_str::<GroupUnionSpec>("[0]").is_err());
        let s: GroupUnionSpec = serde_json::from_str("[2,3]").unwrap();
        assert_eq!(s.dim(), 5);
    }

    #[test]
    fn permutation_is_a_permutation_matrix() {
        let s = GroupUnionSpec::new(vec![2, 3, 1]).unwrap();
        let d = s.dim();
        let mut hit = vec![0; d];
        for j in 0..d {
            let mut e = vec![C64::new(0.0, 0.0); d];
            e[j] = C64::new(1.0, 0.0);
            let col = s.permute(&e);
            let ones: Vec<usize> = (0..d).filter(|&i| col[i].re == 1.0).collect();
            assert_eq!(ones.len(), 1);
            hit[ones[0]] += 1;
        }
        assert!(hit.iter().all(|&h| h == 1));
    }

    proptest! {
        #[test]
        fn union_contains_one_and_is_sorted(orders in prop::collection::vec(1usize..9, 1..4)) {
            let s = GroupUnionSpec::new(orders).unwrap();
            let pts = s.union_points();
            prop_assert_eq!(pts[0], RootOfUnity::one());
            for w in pts.windows(2) {
                prop_assert!(w[0].turns() < w[1].turns());
            }
            for p in &pts {
                prop_assert!(s.contains(p));
            }
        }

        #[test]
        fn permutation_has_period_lcm(orders in prop::collection::vec(1usize..7, 1..4),
                                      seed in prop::collection::vec(-1.0..1.0f64, 24)) {
            let s = GroupUnionSpec::new(orders).unwrap();
            let x: Vec<C64> = (0..s.dim()).map(|i| C64::new(seed[i], seed[23 - i])).collect();
            let mut y = x.clone();
            for _ in 0..s.period() {
                y = s.permute(&y);
            }
            prop_assert_eq!(y, x);
        }
    }
}
