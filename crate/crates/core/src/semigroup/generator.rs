//! The generator `A = B + e⊗q + q⊗e`, `B = (-1) ⊕ ⊕_n (ω_n D - q_n)`,
//! where `D` differentiates on `𝕋` and acts on mode `k` as `ik`.

use rayon::prelude::*;
use serde::Serialize;

use crate::certified::CertifiedComplex;
use crate::error::{CandidateReason, Error, Result};
use crate::model::{WeightKind, WeightSeq};
use crate::scanner::Verdict;
use crate::semigroup::rational::{Rational, RationalEnum};
use crate::semigroup::state::FourierState;
use crate::C64;

/// Guard on `|iβ + q_n - iω_n k|` in the resolvent of `B`.
pub const RESOLVENT_GUARD: f64 = 1e-14;
/// Grid points closer than this to `β = 0` are expected to be singular.
pub const ZERO_NEIGHBORHOOD: f64 = 1e-3;
/// Required agreement between the computed certificate residual and `q_n`.
pub const CERTIFICATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    weights: WeightSeq,
    enumeration: RationalEnum,
    depth: usize,
}

impl GeneratorSpec {
    pub fn new(weights: WeightSeq, depth: usize) -> Result<Self> {
        if weights.kind() != WeightKind::Semigroup {
            return Err(Error::Invalid("semigroup: weights must be built for the semigroup".into()));
        }
        if depth == 0 {
            return Err(Error::Invalid("depth: must be >= 1".into()));
        }
        Ok(Self {
            weights,
            enumeration: RationalEnum,
            depth,
        })
    }

    /// Dyadic weights `q_n = 2^-n / 2π`.
    pub fn dyadic(depth: usize) -> Self {
        Self::new(WeightSeq::dyadic_semigroup(), depth).expect("valid dyadic generator")
    }

    pub fn weights(&self) -> &WeightSeq {
        &self.weights
    }

    pub fn enumeration(&self) -> &RationalEnum {
        &self.enumeration
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn q(&self, n: usize) -> f64 {
        self.weights.q(n)
    }

    pub fn omega(&self, n: usize) -> f64 {
        to_f64(&self.enumeration.omega(n as u64))
    }

    /// `B f`: head `↦ -head`, mode `(n,k) ↦ (iω_n k - q_n) f_nk`.
    pub fn apply_b(&self, f: &FourierState) -> FourierState {
        f.map_modes(|h| -h, |n, k, c| (C64::new(-self.q(n), self.omega(n) * k as f64)) * c)
    }

    /// `A f = B f + ⟨e,f⟩ q + ⟨q,f⟩ e`, with `q` materialised on blocks `1..=depth`.
    pub fn apply_a(&self, f: &FourierState) -> FourierState {
        let mut out = self.apply_b(f);
        if f.head != C64::new(0.0, 0.0) {
            out = out.add_scaled(f.head, &FourierState::q(&self.weights, self.depth));
        }
        out.head += f.pair_q(&self.weights);
        out
    }

    /// `R(iβ, B) f`.
    pub fn resolvent_b(&self, beta: f64, f: &FourierState) -> Result<FourierState> {
        check_beta(beta)?;
        let ib = C64::new(0.0, beta);
        for (n, k, _) in f.modes() {
            let den = C64::new(self.q(n), beta - self.omega(n) * k as f64);
            if den.norm() <= RESOLVENT_GUARD {
                return Err(Error::Singular { mu: ib, gap: den.norm() });
            }
        }
        Ok(f.map_modes(
            |h| h / (ib + 1.0),
            |n, k, c| c / C64::new(self.q(n), beta - self.omega(n) * k as f64),
        ))
    }

    /// `⟨q, R(iβ,B) q⟩ = Σ 2π q_n² / (iβ + q_n)` truncated at `depth`, radius `2^-depth`.
    pub fn h_scalar(&self, beta: f64, depth: usize) -> Result<CertifiedComplex> {
        check_beta(beta)?;
        let ib = C64::new(0.0, beta);
        let value: C64 = (1..=depth)
            .map(|n| {
                let q = self.q(n);
                // At β = 0 each term is exactly the block mass, so the sum telescopes exactly.
                let ratio = if beta == 0.0 { C64::new(1.0, 0.0) } else { q / (ib + q) };
                self.weights.mass(n) * ratio
            })
            .sum();
        Ok(CertifiedComplex::new(value, self.weights.tail(depth)))
    }

    /// `1 - ⟨q, R(iβ,B) q⟩ / (iβ + 1)`. A disk excluding zero certifies `iβ ∉ σ(A)`.
    pub fn denominator_a(&self, beta: f64, depth: usize) -> Result<CertifiedComplex> {
        let h = self.h_scalar(beta, depth)?;
        let factor = if beta == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(1.0, beta).inv()
        };
        let den = CertifiedComplex::exact(C64::new(1.0, 0.0)) - h.scale(factor);
        if !den.excludes_zero() {
            return Err(Error::SingularCandidate {
                lambda: C64::new(0.0, beta),
                reason: CandidateReason::DenominatorContainsZero,
                denominator: Some(den),
            });
        }
        Ok(den)
    }

    /// An approximate eigenvector for `ir`: a single mode `(n, k)` with
    /// `ω_n k = r`, normalised to norm 1; `‖(A - ir) z‖ = q_n`.
    pub fn approx_eigenvalue_cert(&self, r: &Rational, occurrence: u64) -> Result<SgCertificate> {
        let one = Rational::from_integer(1);
        if *r < one {
            return Err(Error::Invalid(format!("r: must be >= 1, got {r}")));
        }
        let (k, omega) = if *r <= Rational::from_integer(2) {
            (1u64, *r)
        } else {
            // Largest integer strictly below r.
            let k = r.ceil().to_integer() - 1;
            (k, r / k)
        };
        let n = self.enumeration.index_of(&omega, occurrence)? as usize;
        debug_assert_eq!(self.enumeration.omega(n as u64), omega);
        let r_f = to_f64(r);
        let z = FourierState::mode(n, k as i64, C64::new(1.0 / std::f64::consts::TAU, 0.0));
        let residual = self
            .apply_a(&z)
            .sub(&z.scale(C64::new(0.0, r_f)))
            .norm();
        let q = self.q(n);
        if (residual - q).abs() > CERTIFICATE_TOL {
            return Err(Error::CheckFailed(format!(
                "certificate residual {residual:e} differs from q_n = {q:e}"
            )));
        }
        Ok(SgCertificate {
            r: r.to_string(),
            n,
            k,
            omega: omega.to_string(),
            residual,
            q_n: q,
            norm: z.norm(),
        })
    }

    pub fn scan_imaginary_axis(&self, betas: &[f64], depth: usize, cert_points: &[Rational]) -> Result<AxisReport> {
        for &b in betas {
            check_beta(b)?;
        }
        let near = near_zero_threshold(depth);
        let points = betas
            .par_iter()
            .map(|&beta| {
                let verdict = Verdict::from_denominator(self.denominator_a(beta, depth))?;
                Ok(AxisPoint {
                    beta,
                    expected_singular: beta.abs() < near,
                    verdict,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let zero = Verdict::from_denominator(self.denominator_a(0.0, depth))?;
        let certificates = cert_points
            .iter()
            .map(|r| self.approx_eigenvalue_cert(r, 1))
            .collect::<Result<Vec<_>>>()?;
        Ok(AxisReport {
            depth,
            points,
            zero,
            certificates,
        })
    }
}

fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta.abs() < 1.0) {
        return Err(Error::Invalid(format!("beta: must lie in (-1, 1), got {beta}")));
    }
    Ok(())
}

/// `max(10⁻³, 2^(2 - depth))`.
pub fn near_zero_threshold(depth: usize) -> f64 {
    ZERO_NEIGHBORHOOD.max(0.5f64.powi(depth as i32 - 2))
}

/// `±0.1, ±0.3, …, ±0.9` and `0`, ascending.
pub fn default_beta_grid() -> Vec<f64> {
    let mut g: Vec<f64> = [-0.9, -0.7, -0.5, -0.3, -0.1, 0.0, 0.1, 0.3, 0.5, 0.7, 0.9].to_vec();
    g.sort_by(f64::total_cmp);
    g
}

/// `1, 3/2, 2, 7/3`.
pub fn default_cert_points() -> Vec<Rational> {
    vec![
        Rational::from_integer(1),
        Rational::new(3, 2),
        Rational::from_integer(2),
        Rational::new(7, 3),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct SgCertificate {
    pub r: String,
    pub n: usize,
    pub k: u64,
    pub omega: String,
    pub residual: f64,
    pub q_n: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxisPoint {
    pub beta: f64,
    pub expected_singular: bool,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxisReport {
    pub depth: usize,
    pub points: Vec<AxisPoint>,
    /// Verdict at `β = 0`, where the denominator is exactly `2^-depth`.
    pub zero: Verdict,
    pub certificates: Vec<SgCertificate>,
}

impl AxisReport {
    /// Every point away from 0 is certified and `β = 0` is flagged.
    pub fn passed(&self) -> bool {
        self.points
            .iter()
            .filter(|p| !p.expected_singular)
            .all(|p| p.verdict.is_certified())
            && matches!(self.zero, Verdict::SingularCandidate { .. })
    }
}
