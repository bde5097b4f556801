use thiserror::Error;

use crate::certified::CertifiedComplex;
use crate::C64;

pub type Result<T> = std::result::Result<T, Error>;

/// Why a rank-one denominator could not be certified away from zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularCause {
    /// The point value of `γ` sits on 1 (up to rounding).
    ValueAtOne,
    /// `γ` is away from 1 but the truncation radius is too large to tell.
    RadiusDominated,
}

/// Why a point was flagged as a spectral candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateReason {
    /// The unperturbed block-diagonal part is not invertible there.
    UnperturbedSpectrum,
    /// The certified denominator disk contains zero.
    DenominatorContainsZero,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("cyclic block resolvent is singular at mu = {mu} (|mu^m - 1| = {gap:e})")]
    Singular { mu: C64, gap: f64 },

    #[error("rank-one update is singular: gamma = {gamma} ({cause:?})")]
    SingularUpdate {
        gamma: CertifiedComplex,
        cause: SingularCause,
    },

    #[error("spectral candidate at lambda = {lambda} ({reason:?})")]
    SingularCandidate {
        lambda: C64,
        reason: CandidateReason,
        denominator: Option<CertifiedComplex>,
    },

    #[error("tail bound invalid at lambda = {lambda}: |lambda - 1 + q_n| <= q_n for some n")]
    TailInvalid { lambda: C64 },

    #[error("unsupported composition: {0}")]
    Unsupported(String),

    #[error("point {0} is not in the target set U")]
    NotInU(String),

    #[error("secular function evaluated within {distance:e} of a pole at {pole}")]
    PoleHit { pole: C64, distance: f64 },

    #[error("root count mismatch: found {found}, expected {expected}")]
    RootCountMismatch { found: usize, expected: usize },

    #[error("a posteriori check failed: {0}")]
    CheckFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
