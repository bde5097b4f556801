use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the normalized masses `m_n = c·q_n` (summing to one) are generated.
///
/// Every rule must provide its tail `Σ_{n>N} m_n` in closed form; the
/// certified sums rely on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeightRule {
    /// `m_n = 2^-n`, tail `2^-N`.
    #[default]
    Dyadic,
    /// `m_n = (1-r) r^(n-1)`, tail `r^N`.
    Geometric { ratio: f64 },
}

impl WeightRule {
    fn mass(&self, n: usize) -> f64 {
        match *self {
            WeightRule::Dyadic => 0.5f64.powi(n as i32),
            WeightRule::Geometric { ratio } => (1.0 - ratio) * ratio.powi(n as i32 - 1),
        }
    }

    fn tail(&self, n: usize) -> f64 {
        match *self {
            WeightRule::Dyadic => 0.5f64.powi(n as i32),
            WeightRule::Geometric { ratio } => ratio.powi(n as i32),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// Weights for the single operator on `C ⊕ (C^d)^N`; `Σ d·q_n = 1`.
    SingleOperator { dim: usize },
    /// Weights for the semigroup generator; `Σ 2π·q_n = 1`.
    Semigroup,
}

/// The summable weight sequence `(q_n)_{n>=1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightSeq {
    kind: WeightKind,
    rule: WeightRule,
}

impl WeightSeq {
    pub fn single_operator(dim: usize, rule: WeightRule) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid("weights: dimension must be >= 1".into()));
        }
        Self::checked(WeightKind::SingleOperator { dim }, rule, 0.5)
    }

    pub fn semigroup(rule: WeightRule) -> Result<Self> {
        Self::checked(WeightKind::Semigroup, rule, 1.0)
    }

    pub fn dyadic(dim: usize) -> Self {
        Self::single_operator(dim, WeightRule::Dyadic).expect("dyadic weights are valid")
    }

    pub fn dyadic_semigroup() -> Self {
        Self::semigroup(WeightRule::Dyadic).expect("dyadic weights are valid")
    }

    fn checked(kind: WeightKind, rule: WeightRule, q_max: f64) -> Result<Self> {
        if let WeightRule::Geometric { ratio } = rule {
            if !(ratio > 0.0 && ratio < 1.0) {
                return Err(Error::Invalid(format!(
                    "weight_rule: geometric ratio must lie in (0,1), got {ratio}"
                )));
            }
        }
        let w = Self { kind, rule };
        // q_n is decreasing for both rules, so q_1 is the maximum.
        if w.q(1) > q_max {
            return Err(Error::Invalid(format!(
                "weight_rule: q_1 = {} exceeds the admissible maximum {q_max}",
                w.q(1)
            )));
        }
        Ok(w)
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn rule(&self) -> WeightRule {
        self.rule
    }

    /// The mass constant `c` with `Σ c·q_n = 1` (`d` or `2π`).
    pub fn scale(&self) -> f64 {
        match self.kind {
            WeightKind::SingleOperator { dim } => dim as f64,
            WeightKind::Semigroup => TAU,
        }
    }

    /// `q_n` for `n >= 1`.
    pub fn q(&self, n: usize) -> f64 {
        debug_assert!(n >= 1);
        self.rule.mass(n) / self.scale()
    }

    /// `c·q_n`, exact for the dyadic rule.
    pub fn mass(&self, n: usize) -> f64 {
        self.rule.mass(n)
    }

    /// `Σ_{n>N} c·q_n` in closed form.
    pub fn tail(&self, depth: usize) -> f64 {
        self.rule.tail(depth)
    }
}
