//! Unit-circle sweep for the single operator.
//!
//! Points away from `U` get a resolvent certificate from the rank-one
//! denominator; points of `U` get an explicit approximate eigenvector whose
//! residual is `q_n (1 + |⟨𝟙, z⟩|)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::certified::CertifiedComplex;
use crate::error::{CandidateReason, Error, Result};
use crate::model::{apply_t, BlockVector, GroupUnionSpec, RootOfUnity, WeightSeq};
use crate::resolvent::{denominator_t, empirical_block_bound};
use crate::C64;

pub const DEFAULT_EXCLUSION_RADIUS: f64 = 0.05;
pub const DEFAULT_CERTIFICATE_BLOCK: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedResolvent {
        denominator: CertifiedComplex,
        denominator_abs_lower: f64,
    },
    SingularCandidate {
        reason: CandidateReason,
        denominator: Option<CertifiedComplex>,
    },
    TailInvalid,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::CertifiedResolvent { .. } => "certified-resolvent",
            Verdict::SingularCandidate { .. } => "singular-candidate",
            Verdict::TailInvalid => "tail-invalid",
        }
    }

    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::CertifiedResolvent { .. })
    }

    /// Lower bound on `|denominator|`, zero when not certified.
    pub fn abs_lower(&self) -> f64 {
        match self {
            Verdict::CertifiedResolvent {
                denominator_abs_lower,
                ..
            } => *denominator_abs_lower,
            _ => 0.0,
        }
    }

    /// Classifies the outcome of [`denominator_t`].
    pub fn from_denominator(res: Result<CertifiedComplex>) -> Result<Self> {
        match res {
            Ok(den) => Ok(Verdict::CertifiedResolvent {
                denominator: den,
                denominator_abs_lower: den.abs_lower(),
            }),
            Err(Error::SingularCandidate {
                reason, denominator, ..
            }) => Ok(Verdict::SingularCandidate {
                reason,
                denominator,
            }),
            Err(Error::TailInvalid { .. }) => Ok(Verdict::TailInvalid),
            Err(e) => Err(e),
        }
    }
}

/// An approximate eigenvector `z^(n)` for a point of `U`.
#[derive(Debug, Clone, Serialize)]
pub struct EigCertificate {
    #[serde(serialize_with = "ser_root")]
    pub target: RootOfUnity,
    pub block: usize,
    /// Sub-block whose cyclic spectrum contains the target.
    pub group: usize,
    #[serde(skip)]
    pub eigenvector: Vec<C64>,
    /// `‖(T - λ) z^(n)‖`, computed by applying `T`.
    pub residual: f64,
    /// `q_n (1 + |⟨𝟙, z⟩|)`.
    pub closed_form: f64,
}

fn ser_root<S: serde::Serializer>(r: &RootOfUnity, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// Tolerance between the computed and the closed-form residual.
pub const CERTIFICATE_MATCH_TOL: f64 = 1e-12;

pub fn residual_certificate(
    spec: &GroupUnionSpec,
    w: &WeightSeq,
    target: RootOfUnity,
    block: usize,
) -> Result<EigCertificate> {
    if block == 0 {
        return Err(Error::Invalid("certificate block index must be >= 1".into()));
    }
    let group = spec
        .first_group_containing(&target)
        .ok_or_else(|| Error::NotInU(target.to_string()))?;
    let m = spec.orders()[group];
    let off = spec.offsets()[group];
    let (num, den) = (target.num(), target.den());

    // z_i = ζ^{-i}/m on sub-block `group`: C z = ζ z for the shift e_i ↦ e_{i+1}.
    let mut z = vec![C64::new(0.0, 0.0); spec.dim()];
    for i in 0..m {
        let k = (i as u64 * num) % den;
        let phase = RootOfUnity::new(den - k, den)?.to_complex();
        z[off + i] = phase / m as f64;
    }
    let mut zn = BlockVector::zero(spec.dim());
    zn.set_block(block, z.clone());

    let lambda = target.to_complex();
    let tz = apply_t(spec, w, &zn)?;
    let residual = tz.sub(&zn.scale(lambda)).norm1(w, 1.0)?.value.re;
    let ones: C64 = z.iter().sum();
    let closed_form = w.q(block) * (1.0 + ones.norm());
    if (residual - closed_form).abs() > CERTIFICATE_MATCH_TOL {
        return Err(Error::CheckFailed(format!(
            "certificate residual {residual:e} differs from q_n(1+|<1,z>|) = {closed_form:e}"
        )));
    }
    Ok(EigCertificate {
        target,
        block,
        group,
        eigenvector: z,
        residual,
        closed_form,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScanConfig {
    pub grid_size: usize,
    pub exclusion_radius: f64,
    pub depth: usize,
    pub certificate_block: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            grid_size: 3600,
            exclusion_radius: DEFAULT_EXCLUSION_RADIUS,
            depth: crate::DEFAULT_DEPTH,
            certificate_block: DEFAULT_CERTIFICATE_BLOCK,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridPoint {
    /// Angle as a fraction of a full turn.
    pub theta: f64,
    #[serde(skip)]
    pub lambda: C64,
    pub distance_to_u: f64,
    pub excluded: bool,
    pub verdict: Verdict,
    /// Largest block-resolvent norm of `S` observed at this point (infinite on `U`).
    #[serde(skip)]
    pub empirical_block_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub orders: Vec<usize>,
    pub weights: WeightSeq,
    pub config: ScanConfig,
    #[serde(skip)]
    pub points: Vec<GridPoint>,
    /// Maximum of the block-resolvent bound over non-excluded points.
    pub empirical_m: f64,
    pub certificates: Vec<EigCertificate>,
}

impl ScanReport {
    pub fn required(&self) -> impl Iterator<Item = &GridPoint> {
        self.points.iter().filter(|p| !p.excluded)
    }

    pub fn certified_count(&self) -> usize {
        self.points.iter().filter(|p| p.verdict.is_certified()).count()
    }

    /// Every non-excluded grid point received a resolvent certificate.
    pub fn all_required_certified(&self) -> bool {
        self.required().all(|p| p.verdict.is_certified())
    }

    pub fn max_certificate_residual(&self) -> f64 {
        self.certificates.iter().map(|c| c.residual).fold(0.0, f64::max)
    }
}

pub fn scan_unit_circle(spec: &GroupUnionSpec, w: &WeightSeq, cfg: &ScanConfig) -> Result<ScanReport> {
    if cfg.grid_size < 8 {
        return Err(Error::Invalid(format!("grid: size must be >= 8, got {}", cfg.grid_size)));
    }
    if !(cfg.exclusion_radius > 0.0) {
        return Err(Error::Invalid("exclusion_radius: must be positive".into()));
    }
    if cfg.depth == 0 {
        return Err(Error::Invalid("depth: must be >= 1".into()));
    }
    let points: Vec<C64> = spec.union_points().iter().map(|u| u.to_complex()).collect();
    let grid = cfg.grid_size as u64;
    let evaluated: Result<Vec<GridPoint>> = (0..grid)
        .into_par_iter()
        .map(|i| {
            let angle = RootOfUnity::new(i, grid)?;
            let lambda = angle.to_complex();
            let distance_to_u = points
                .iter()
                .map(|u| (lambda - u).norm())
                .fold(f64::INFINITY, f64::min);
            let verdict = Verdict::from_denominator(denominator_t(spec, w, lambda, cfg.depth))?;
            Ok(GridPoint {
                theta: i as f64 / grid as f64,
                lambda,
                distance_to_u,
                excluded: distance_to_u <= cfg.exclusion_radius,
                verdict,
                empirical_block_bound: empirical_block_bound(spec, w, lambda, cfg.depth),
            })
        })
        .collect();
    let points = evaluated?;
    let empirical_m = points
        .iter()
        .filter(|p| !p.excluded)
        .map(|p| p.empirical_block_bound)
        .fold(0.0, f64::max);
    let certificates = spec
        .union_points()
        .into_iter()
        .map(|u| residual_certificate(spec, w, u, cfg.certificate_block))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanReport {
        orders: spec.orders().to_vec(),
        weights: *w,
        config: *cfg,
        points,
        empirical_m,
        certificates,
    })
}
