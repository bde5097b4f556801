//! Resolvents of `S` and `T = S + e⊗q + q⊗e` for the single-operator construction.
//!
//! `S` is block diagonal with head entry `0` and blocks `(1 - q_n) P`. Since
//! `P𝟙 = 𝟙`, the resolvent of every block maps `𝟙` to `𝟙/(λ - 1 + q_n)`, so
//! `⟨q, R(λ,S) q⟩ = Σ d q_n² / (λ - 1 + q_n)` and `⟨e, R(λ,S) q⟩ = 0`.
//! Two rank-one steps then reduce membership of `λ` in the resolvent set of
//! `T` to the scalar `1 - ⟨q, R(λ,S) q⟩ / λ` being nonzero.

use crate::certified::CertifiedComplex;
use crate::error::{CandidateReason, Error, Result};
use crate::model::operator::check_weights;
use crate::model::{apply_t, BlockVector, GroupUnionSpec, TailShape, TailTerm, WeightSeq};
use crate::resolvent::cyclic::{CyclicResolvent, SINGULARITY_GUARD};
use crate::resolvent::sherman_morrison::{
    Functional, LinearSpace, RankOneUpdate, ResolventAction, ShermanMorrison, DEFAULT_GAMMA_TOL,
};
use crate::C64;

/// Points closer than this to the spectrum of `S` are not certified.
pub const SPECTRUM_GUARD: f64 = 1e-10;

/// Relative margin required in `|λ - 1 + q_n| > q_n (1 + ε)` for the tail bound.
pub const TAIL_MARGIN: f64 = 1e-9;

/// Largest depth reached by the automatic refinement in [`resolvent_t`].
pub const MAX_REFINED_DEPTH: usize = 60;

/// Relative residual accepted by [`resolvent_t`].
pub const RESOLVENT_RESIDUAL_TOL: f64 = 1e-9;

impl LinearSpace for BlockVector {
    fn add_scaled(&self, alpha: C64, other: &Self) -> Self {
        BlockVector::add_scaled(self, alpha, other)
    }
}

/// A block vector read as a bounded functional through the ℓ¹/ℓ^∞ pairing.
#[derive(Debug, Clone)]
pub struct BlockFunctional {
    pub vector: BlockVector,
    pub weights: WeightSeq,
    pub depth: usize,
}

impl BlockFunctional {
    pub fn new(vector: BlockVector, weights: WeightSeq, depth: usize) -> Self {
        Self {
            vector,
            weights,
            depth,
        }
    }
}

impl Functional<BlockVector> for BlockFunctional {
    fn pair(&self, v: &BlockVector) -> CertifiedComplex {
        self.vector.pair(v, &self.weights, self.depth)
    }
}

/// For `p ∈ [0,1)` and unimodular `λ ≠ 1`, whether `p < |λ - 1 + p|`.
pub fn circles_inequality(p: f64, lambda: C64) -> Result<bool> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Invalid(format!("circles: p = {p} outside [0,1)")));
    }
    if (lambda.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Invalid(format!("circles: |lambda| = {} != 1", lambda.norm())));
    }
    if lambda == C64::new(1.0, 0.0) {
        return Err(Error::Invalid("circles: lambda = 1 is excluded".into()));
    }
    Ok(p < (lambda - 1.0 + p).norm())
}

/// Lower bound on the distance from `λ` to `σ(S) = {0} ∪ {(1-q_n)u} ∪ U`.
pub fn distance_to_spectrum_of_s(spec: &GroupUnionSpec, w: &WeightSeq, lambda: C64) -> f64 {
    let points: Vec<C64> = spec.union_points().iter().map(|u| u.to_complex()).collect();
    let to_u = points
        .iter()
        .map(|u| (lambda - u).norm())
        .fold(f64::INFINITY, f64::min);
    let mut best = lambda.norm().min(to_u);
    if to_u == 0.0 {
        return 0.0;
    }
    // Beyond the explicit range, |λ - (1-q_n)u| >= |λ - u| - q_n.
    let mut n = 1;
    while w.q(n) > 1e-3 * to_u && n < 4096 {
        for u in &points {
            best = best.min((lambda - (1.0 - w.q(n)) * u).norm());
        }
        n += 1;
    }
    best.min(to_u - w.q(n))
}

/// Resolvent action of `S` at a fixed `λ`.
#[derive(Debug, Clone)]
pub struct ResolventS {
    spec: GroupUnionSpec,
    weights: WeightSeq,
    lambda: C64,
    guard: f64,
}

impl ResolventS {
    pub fn new(spec: &GroupUnionSpec, w: &WeightSeq, lambda: C64) -> Result<Self> {
        Self::with_guard(spec, w, lambda, SINGULARITY_GUARD)
    }

    /// Checks `λ ≠ 0` and that the `𝟙` direction of every block is invertible.
    pub fn with_guard(spec: &GroupUnionSpec, w: &WeightSeq, lambda: C64, guard: f64) -> Result<Self> {
        check_weights(spec, w)?;
        if lambda.norm() <= guard {
            return Err(Error::Singular { mu: lambda, gap: lambda.norm() });
        }
        let gap_one = (lambda - 1.0).norm();
        if gap_one <= guard {
            return Err(Error::Singular { mu: lambda, gap: gap_one });
        }
        // Once q_n < |1-λ|/2 we have |λ-1+q_n| > |1-λ|/2 for all later n.
        let mut n = 1;
        while w.q(n) >= gap_one / 2.0 {
            let q = w.q(n);
            let gap = (lambda / (1.0 - q) - 1.0).norm();
            if gap <= guard {
                return Err(Error::Singular { mu: lambda / (1.0 - q), gap });
            }
            n += 1;
        }
        Ok(Self {
            spec: spec.clone(),
            weights: *w,
            lambda,
            guard,
        })
    }

    /// Cyclic resolvents at `μ = λ/(1 - q_n)`, one per sub-block.
    pub fn block_resolvents(&self, n: usize) -> Result<Vec<CyclicResolvent>> {
        let mu = self.lambda / (1.0 - self.weights.q(n));
        self.spec
            .orders()
            .iter()
            .map(|&m| CyclicResolvent::new(m, mu, self.guard))
            .collect()
    }

    fn apply_block(&self, n: usize, b: &[C64]) -> Result<Vec<C64>> {
        let scale = 1.0 / (1.0 - self.weights.q(n));
        let mut out = Vec::with_capacity(b.len());
        for (r, &off) in self.block_resolvents(n)?.iter().zip(&self.spec.offsets()) {
            out.extend(r.apply(&b[off..off + r.size()]).into_iter().map(|x| x * scale));
        }
        Ok(out)
    }
}

impl ResolventAction<BlockVector> for ResolventS {
    fn lambda(&self) -> C64 {
        self.lambda
    }

    fn apply(&self, f: &BlockVector) -> Result<BlockVector> {
        let mut out = BlockVector::zero(self.spec.dim());
        out.head = f.head / self.lambda;
        for (n, b) in f.tabulated() {
            out.set_block(n, self.apply_block(n, b)?);
        }
        for t in f.tail_terms() {
            let power = match t.shape {
                TailShape::Weight => 1,
                TailShape::ResolventPower { lambda, power } if lambda == self.lambda => power + 1,
                TailShape::ResolventPower { lambda, .. } => {
                    return Err(Error::Unsupported(format!(
                        "tail built at lambda = {lambda} cannot be resolved at {}",
                        self.lambda
                    )))
                }
            };
            out = out.with_tail(TailTerm {
                coeff: t.coeff,
                shape: TailShape::ResolventPower {
                    lambda: self.lambda,
                    power,
                },
            });
        }
        Ok(out)
    }
}

/// `R(λ, S) f`.
pub fn resolvent_s(spec: &GroupUnionSpec, w: &WeightSeq, lambda: C64, f: &BlockVector) -> Result<BlockVector> {
    ResolventS::new(spec, w, lambda)?.apply(f)
}

/// Whether `|λ - 1 + q| > q (1 + ε)` holds for every `q ∈ (0, q_1]`.
///
/// The difference of squares is concave in `q`, so checking `q → 0` and
/// `q = q_1` covers the whole interval.
fn tail_bound_valid(w: &WeightSeq, lambda: C64) -> bool {
    let a = lambda - 1.0;
    let eps = TAIL_MARGIN;
    let h = |q: f64| a.norm_sqr() + 2.0 * q * a.re - q * q * (2.0 * eps + eps * eps);
    a.norm_sqr() > 0.0 && h(w.q(1)) > 0.0
}

/// Certified `⟨q, R(λ,S) q⟩ = Σ d q_n² / (λ - 1 + q_n)`, radius `Σ_{n>N} d q_n`.
pub fn g_scalar(spec: &GroupUnionSpec, w: &WeightSeq, lambda: C64, depth: usize) -> Result<CertifiedComplex> {
    check_weights(spec, w)?;
    if !tail_bound_valid(w, lambda) {
        return Err(Error::TailInvalid { lambda });
    }
    // d q_n² / (λ-1+q_n) = (d q_n) · q_n/(λ-1+q_n); each ratio has modulus < 1.
    let value: C64 = (1..=depth)
        .map(|n| {
            let q = w.q(n);
            w.mass(n) * (q / (lambda - 1.0 + q))
        })
        .sum();
    Ok(CertifiedComplex::new(value, w.tail(depth)))
}

/// Certified `1 - ⟨q, R(λ,S) q⟩ / λ`.
///
/// A disk excluding zero, together with `λ ∉ σ(S)`, certifies that `λ` is in
/// the resolvent set of `T`. Otherwise a [`Error::SingularCandidate`] is
/// returned; spectrum membership is never claimed.
pub fn denominator_t(spec: &GroupUnionSpec, w: &WeightSeq, lambda: C64, depth: usize) -> Result<CertifiedComplex> {
    if lambda.norm() == 0.0 {
        return Err(Error::Invalid("denominator: lambda must be nonzero".into()));
    }
    let g = g_scalar(spec, w, lambda, depth)?;
    let den = CertifiedComplex::exact(C64::new(1.0, 0.0)) - g.scale(lambda.inv());
    if distance_to_spectrum_of_s(spec, w, lambda) <= SPECTRUM_GUARD {
        return Err(Error::SingularCandidate {
            lambda,
            reason: CandidateReason::UnperturbedSpectrum,
            denominator: Some(den),
        });
    }
    if !den.excludes_zero() {
        return Err(Error::SingularCandidate {
            lambda,
            reason: CandidateReason::DenominatorContainsZero,
            denominator: Some(den),
        });
    }
    Ok(den)
}

/// Largest `‖R(λ, (1-q)P)‖_1` over `q ∈ {q_1, …, q_depth, 0}`; infinite if one is singular.
pub fn empirical_block_bound(spec: &GroupUnionSpec, w: &WeightSeq, lambda: C64, depth: usize) -> f64 {
    let qs = (1..=depth).map(|n| w.q(n)).chain(std::iter::once(0.0));
    let mut best = 0.0f64;
    for q in qs {
        let mu = lambda / (1.0 - q);
        for &m in spec.orders() {
            match CyclicResolvent::new(m, mu, SINGULARITY_GUARD) {
                Ok(r) => best = best.max(r.l1_norm() / (1.0 - q)),
                Err(_) => return f64::INFINITY,
            }
        }
    }
    best
}

/// `R(λ, T) f` with its a posteriori residual.
#[derive(Debug, Clone)]
pub struct ResolventT {
    pub value: BlockVector,
    /// `‖(λ - T) R f - f‖ / ‖f‖` (absolute when `f = 0`), evaluated on the truncation.
    pub relative_residual: f64,
    pub depth: usize,
    /// `γ` of the second rank-one step, `⟨q, R(λ, S + e⊗q) e⟩`.
    pub gamma: CertifiedComplex,
}

/// `‖(λ - T) r_N - f‖` with `r_N` the depth-`N` truncation of `r`, certified upper bound.
pub fn resolvent_residual(
    spec: &GroupUnionSpec,
    w: &WeightSeq,
    lambda: C64,
    r: &BlockVector,
    f: &BlockVector,
    depth: usize,
    accuracy: f64,
) -> Result<f64> {
    let rt = r.truncate(w, depth);
    let tr = apply_t(spec, w, &rt)?;
    let res = rt.scale(lambda).sub(&tr).sub(f);
    let n = res.norm1(w, accuracy)?;
    Ok(n.value.re + n.radius)
}

/// Resolvent of `T` by two rank-one updates of `R(λ, S)`, with depth
/// doubling (capped at [`MAX_REFINED_DEPTH`]) until the residual check passes.
pub fn resolvent_t(
    spec: &GroupUnionSpec,
    w: &WeightSeq,
    lambda: C64,
    f: &BlockVector,
    depth: usize,
) -> Result<ResolventT> {
    let d = spec.dim();
    let nf = f.norm1(w, 1e-16)?;
    let norm_f = nf.value.re + nf.radius;
    let mut depth = depth.max(1);
    loop {
        denominator_t(spec, w, lambda, depth)?;
        let base = ResolventS::new(spec, w, lambda)?;
        let first = ShermanMorrison::new(
            base,
            RankOneUpdate {
                vector: BlockVector::q(d),
                functional: BlockFunctional::new(BlockVector::e(d), *w, depth),
            },
            DEFAULT_GAMMA_TOL,
        )?;
        let second = ShermanMorrison::new(
            first,
            RankOneUpdate {
                vector: BlockVector::e(d),
                functional: BlockFunctional::new(BlockVector::q(d), *w, depth),
            },
            DEFAULT_GAMMA_TOL,
        )?;
        let value = second.apply(f)?;
        let accuracy = 1e-3 * RESOLVENT_RESIDUAL_TOL * norm_f.max(f64::MIN_POSITIVE);
        let res = resolvent_residual(spec, w, lambda, &value, f, depth, accuracy)?;
        let relative = if norm_f > 0.0 { res / norm_f } else { res };
        if relative <= RESOLVENT_RESIDUAL_TOL {
            return Ok(ResolventT {
                value,
                relative_residual: relative,
                depth,
                gamma: second.gamma(),
            });
        }
        if depth >= MAX_REFINED_DEPTH {
            return Err(Error::CheckFailed(format!(
                "resolvent residual {relative:e} above {RESOLVENT_RESIDUAL_TOL:e} at depth {depth}"
            )));
        }
        depth = (depth * 2).min(MAX_REFINED_DEPTH);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::CandidateReason;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn setup(orders: &[usize]) -> (GroupUnionSpec, WeightSeq) {
        let s = GroupUnionSpec::new(orders.to_vec()).unwrap();
        let w = WeightSeq::dyadic(s.dim());
        (s, w)
    }

    /// Partial-summation oracle written independently of `g_scalar`.
    fn g_oracle(d: usize, lambda: C64, depth: i32) -> C64 {
        (1..=depth)
            .map(|n| {
                let q = 2f64.powi(-n) / d as f64;
                c(d as f64 * q * q, 0.0) / (lambda - 1.0 + q)
            })
            .sum()
    }

    #[test]
    fn g_scalar_scalar_block_at_minus_one() {
        let (s, w) = setup(&[1]);
        let g = g_scalar(&s, &w, c(-1.0, 0.0), 30).unwrap();
        let oracle = g_oracle(1, c(-1.0, 0.0), 30);
        assert!((g.value - oracle).norm() < 1e-15);
        assert!((g.value.re - -0.21339).abs() < 1e-5);
        assert_eq!(g.radius, 2f64.powi(-30));
    }

    #[test]
    fn g_scalar_rejects_lambda_one() {
        let (s, w) = setup(&[2, 3]);
        assert!(matches!(g_scalar(&s, &w, c(1.0, 0.0), 40), Err(Error::TailInvalid { .. })));
    }

    #[test]
    fn denominator_examples() {
        let (s, w) = setup(&[1]);
        let den = denominator_t(&s, &w, c(-1.0, 0.0), 40).unwrap();
        assert!((den.value - (1.0 + g_oracle(1, c(-1.0, 0.0), 40))).norm() < 1e-15);
        assert!((den.value.re - 0.78661).abs() < 1e-5);

        let den = denominator_t(&s, &w, c(0.0, 1.0), 40).unwrap();
        assert!(den.excludes_zero());

        // -1 ∈ U for orders [2]: the certificate must refuse it.
        let (s2, w2) = setup(&[2]);
        match denominator_t(&s2, &w2, c(-1.0, 0.0), 40) {
            Err(Error::SingularCandidate { reason, .. }) => {
                assert_eq!(reason, CandidateReason::UnperturbedSpectrum)
            }
            other => panic!("expected candidate, got {other:?}"),
        }
    }

    #[test]
    fn resolvent_s_examples() {
        let (s, w) = setup(&[2, 3]);
        let r = resolvent_s(&s, &w, c(0.0, 1.0), &BlockVector::e(5)).unwrap();
        assert_eq!(r.head, c(0.0, -1.0));
        assert_eq!(r.support_end(), 0);

        let lambda = C64::from_polar(1.0, 0.7);
        let rq = resolvent_s(&s, &w, lambda, &BlockVector::q(5)).unwrap();
        for n in 1..20 {
            let expect = w.q(n) / (lambda - 1.0 + w.q(n));
            for x in rq.block(&w, n) {
                assert!((x - expect).norm() < 1e-15);
            }
        }

        let (s1, w1) = setup(&[1]);
        let r = resolvent_s(&s1, &w1, c(-1.0, 0.0), &BlockVector::unit(1, 1, 0)).unwrap();
        assert!((r.block(&w1, 1)[0] - c(-2.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pairing_identities() {
        let (s, w) = setup(&[2, 3]);
        for lambda in [c(0.0, 1.0), c(-0.6, -0.8), c(2.0, 0.5)] {
            let rq = resolvent_s(&s, &w, lambda, &BlockVector::q(5)).unwrap();
            let re = resolvent_s(&s, &w, lambda, &BlockVector::e(5)).unwrap();
            assert_eq!(BlockVector::e(5).pair(&rq, &w, 40).value, c(0.0, 0.0));
            assert_eq!(BlockVector::q(5).pair(&re, &w, 40).value, c(0.0, 0.0));
            assert_eq!(BlockVector::e(5).pair(&re, &w, 40).value, lambda.inv());
            if lambda.norm() == 1.0 {
                let g = g_scalar(&s, &w, lambda, 40).unwrap();
                let p = BlockVector::q(5).pair(&rq, &w, 40);
                assert!((p.value - g.value).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn circles_examples() {
        assert!(circles_inequality(0.0, c(-1.0, 0.0)).unwrap());
        assert!(circles_inequality(0.5, c(-1.0, 0.0)).unwrap());
        let near = C64::from_polar(1.0, 0.01);
        assert!(circles_inequality(0.99, near).unwrap());
        assert!(circles_inequality(0.5, c(1.0, 0.0)).is_err());
        assert!(circles_inequality(1.0, c(-1.0, 0.0)).is_err());
    }

    #[test]
    fn resolvent_t_identity_on_e() {
        let (s, w) = setup(&[2, 3]);
        let r = resolvent_t(&s, &w, c(0.0, -1.0), &BlockVector::e(5), 40).unwrap();
        assert!(r.relative_residual <= 1e-9, "{}", r.relative_residual);
        let g = g_scalar(&s, &w, c(0.0, -1.0), 40).unwrap();
        assert!((r.gamma.value - g.value / c(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn resolvent_t_of_zero_is_zero() {
        let (s, w) = setup(&[2, 3]);
        let r = resolvent_t(&s, &w, c(0.0, 1.0), &BlockVector::zero(5), 40).unwrap();
        assert_eq!(r.value.norm1(&w, 1e-12).unwrap().value.re, 0.0);
    }

    #[test]
    fn resolvent_t_matches_neumann_series_outside_the_disk() {
        let (s, w) = setup(&[2, 3]);
        let mut f = BlockVector::e(5);
        f.set_block(2, vec![c(0.25, 0.0), c(0.0, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(0.125, 0.0)]);
        let r = resolvent_t(&s, &w, c(2.0, 0.0), &f, 40).unwrap();

        // Σ_k T^k f / 2^{k+1}, truncating to 60 blocks before each application.
        let mut term = f.clone();
        let mut sum = BlockVector::zero(5);
        for k in 0..80 {
            sum = sum.add_scaled(c(0.5f64.powi(k + 1), 0.0), &term);
            term = apply_t(&s, &w, &term.truncate(&w, 60)).unwrap();
        }
        let diff = r.value.truncate(&w, 60).sub(&sum.truncate(&w, 60));
        assert!(diff.norm1(&w, 1e-12).unwrap().value.re < 1e-10);

        let nr = r.value.norm1(&w, 1e-12).unwrap();
        let nf = f.norm1(&w, 1e-12).unwrap();
        assert!(nr.value.re - nr.radius <= nf.value.re / (2.0 - 1.0) + 1e-12);
    }

    #[test]
    fn resolvent_t_refuses_points_of_u() {
        let (s, w) = setup(&[2, 3]);
        let root = C64::from_polar(1.0, std::f64::consts::TAU / 3.0);
        assert!(resolvent_t(&s, &w, root, &BlockVector::e(5), 40).is_err());
    }

    #[test]
    fn depth_increase_nests_disks() {
        let (s, w) = setup(&[4, 6]);
        for k in 1..40 {
            let lambda = C64::from_polar(1.0, 0.157 * k as f64);
            let a = g_scalar(&s, &w, lambda, 20).unwrap();
            let b = g_scalar(&s, &w, lambda, 40).unwrap();
            assert!(b.is_within(&a, 1e-15));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn resolvent_identity_on_probe_vectors(theta in 0.02..6.26f64, entries in prop::collection::vec(-1.0..1.0f64, 10)) {
            let (s, w) = setup(&[2, 3]);
            let lambda = C64::from_polar(1.0, theta);
            prop_assume!(s.distance_to_union(lambda) > 0.05);
            let mut f = BlockVector::zero(5);
            f.head = c(entries[0], entries[9]);
            f.set_block(3, entries[1..6].iter().map(|&x| c(x, 0.0)).collect());
            f.set_block(7, entries[5..10].iter().map(|&x| c(0.0, x)).collect());
            let r = resolvent_t(&s, &w, lambda, &f, 40).unwrap();
            prop_assert!(r.relative_residual <= 1e-9);
        }
    }
}
