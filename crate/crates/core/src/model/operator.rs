use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::rng::substream;
use crate::model::block::{BlockVector, TailTerm};
use crate::model::group::GroupUnionSpec;
use crate::model::weights::{WeightKind, WeightSeq};
use crate::C64;

pub(crate) fn check_weights(spec: &GroupUnionSpec, w: &WeightSeq) -> Result<()> {
    match w.kind() {
        WeightKind::SingleOperator { dim } if dim == spec.dim() => Ok(()),
        WeightKind::SingleOperator { dim } => Err(Error::Invalid(format!(
            "weights built for d = {dim}, spec has d = {}",
            spec.dim()
        ))),
        WeightKind::Semigroup => Err(Error::Invalid(
            "semigroup weights passed to the single-operator construction".into(),
        )),
    }
}

/// `T f` for a finitely supported `f`.
///
/// Head: `Σ q_n ⟨𝟙, f_n⟩`. Block `n`: `(1 - q_n) P f_n + f_0 q_n 𝟙`; the second
/// summand is carried as a closed-form tail so it covers every block.
pub fn apply_t(spec: &GroupUnionSpec, w: &WeightSeq, f: &BlockVector) -> Result<BlockVector> {
    check_weights(spec, w)?;
    if !f.is_exact() {
        return Err(Error::Unsupported(
            "apply_t needs a finitely supported input; truncate the tail first".into(),
        ));
    }
    let d = spec.dim();
    let mut out = BlockVector::zero(d);
    let mut head = C64::new(0.0, 0.0);
    for (n, b) in f.tabulated() {
        let q = w.q(n);
        head += q * b.iter().sum::<C64>();
        let pb = spec.permute(b);
        out.set_block(n, pb.into_iter().map(|x| x * (1.0 - q)).collect());
    }
    out.head = head;
    if f.head != C64::new(0.0, 0.0) {
        out = out.with_tail(TailTerm::weight(f.head));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct StochasticityReport {
    pub trials: usize,
    /// Largest `(|‖Tf‖ - ‖f‖| - radius)^+ / ‖f‖` over the trials.
    pub max_violation: f64,
    /// Trials where `Tf` had an entry that is not a non-negative real.
    pub positivity_failures: usize,
}

impl StochasticityReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.positivity_failures == 0 && self.max_violation <= tol
    }
}

/// Random non-negative finitely supported `f` (reproducible from `seed`).
pub fn random_nonnegative(dim: usize, rng: &mut impl Rng) -> BlockVector {
    let mut f = BlockVector::zero(dim);
    if rng.gen_bool(0.8) {
        f.head = C64::new(rng.gen::<f64>(), 0.0);
    }
    let blocks = rng.gen_range(0..6);
    for _ in 0..blocks {
        let n = rng.gen_range(1..=16);
        let b = (0..dim).map(|_| C64::new(rng.gen::<f64>(), 0.0)).collect();
        f.set_block(n, b);
    }
    f
}

/// Checks `Tf >= 0` and `‖Tf‖ = ‖f‖` on random non-negative inputs plus `e` and `0`.
pub fn stochasticity_check(
    spec: &GroupUnionSpec,
    w: &WeightSeq,
    trials: usize,
    seed: u64,
) -> Result<StochasticityReport> {
    if trials == 0 {
        return Err(Error::Invalid("stochasticity: trials must be >= 1".into()));
    }
    let d = spec.dim();
    let mut rng = substream(seed, "stochasticity");
    let mut inputs = vec![BlockVector::e(d), BlockVector::zero(d)];
    inputs.extend((0..trials).map(|_| random_nonnegative(d, &mut rng)));

    let mut report = StochasticityReport {
        trials,
        max_violation: 0.0,
        positivity_failures: 0,
    };
    for f in &inputs {
        let tf = apply_t(spec, w, f)?;
        if !tf.is_nonnegative() {
            report.positivity_failures += 1;
        }
        let nf = f.norm1(w, 1.0)?.value.re;
        if nf == 0.0 {
            let ntf = tf.norm1(w, 1e-300_f64.max(f64::MIN_POSITIVE))?;
            report.max_violation = report.max_violation.max(ntf.value.re);
            continue;
        }
        let ntf = tf.norm1(w, 1e-16 * nf)?;
        let v = ((ntf.value.re - nf).abs() - ntf.radius).max(0.0) / nf;
        report.max_violation = report.max_violation.max(v);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn t_maps_e_to_q() {
        let spec = GroupUnionSpec::new(vec![2, 3]).unwrap();
        let w = WeightSeq::dyadic(5);
        let te = apply_t(&spec, &w, &BlockVector::e(5)).unwrap();
        assert_eq!(te.head, c(0.0));
        for n in 1..30 {
            assert_eq!(te.block(&w, n), vec![c(w.q(n)); 5]);
        }
        let nq = te.norm1(&w, 1e-13).unwrap();
        assert!(nq.contains(c(1.0)));
    }

    #[test]
    fn scalar_block_unit_vector() {
        let spec = GroupUnionSpec::new(vec![1]).unwrap();
        let w = WeightSeq::dyadic(1);
        let t = apply_t(&spec, &w, &BlockVector::unit(1, 1, 0)).unwrap();
        assert_eq!(t.head, c(0.5));
        assert_eq!(t.block(&w, 1), vec![c(0.5)]);
        assert!(t.is_exact());
    }

    #[test]
    fn zero_maps_to_zero() {
        let spec = GroupUnionSpec::new(vec![3]).unwrap();
        let w = WeightSeq::dyadic(3);
        let t = apply_t(&spec, &w, &BlockVector::zero(3)).unwrap();
        assert_eq!(t, BlockVector::zero(3));
    }

    #[test]
    fn rejects_tailed_input_and_mismatched_weights() {
        let spec = GroupUnionSpec::new(vec![2]).unwrap();
        assert!(matches!(
            apply_t(&spec, &WeightSeq::dyadic(2), &BlockVector::q(2)),
            Err(Error::Unsupported(_))
        ));
        assert!(apply_t(&spec, &WeightSeq::dyadic(3), &BlockVector::e(2)).is_err());
        assert!(apply_t(&spec, &WeightSeq::dyadic_semigroup(), &BlockVector::e(2)).is_err());
    }

    #[test]
    fn stochasticity_on_two_and_three() {
        let spec = GroupUnionSpec::new(vec![2, 3]).unwrap();
        let r = stochasticity_check(&spec, &WeightSeq::dyadic(5), 100, 11).unwrap();
        assert!(r.passed(1e-12), "{r:?}");
        assert!(stochasticity_check(&spec, &WeightSeq::dyadic(5), 0, 11).is_err());
    }

    // Direct summation oracle for ‖Tf‖ on finitely supported f ≥ 0:
    // f_0 Σ d q_n + Σ_n (q_n + (1 - q_n)) ⟨𝟙, f_n⟩ = ‖f‖.
    proptest! {
        #[test]
        fn positive_and_norm_preserving(orders in prop::collection::vec(1usize..7, 1..4), seed in any::<u64>()) {
            let spec = GroupUnionSpec::new(orders).unwrap();
            let w = WeightSeq::dyadic(spec.dim());
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let f = random_nonnegative(spec.dim(), &mut rng);
            let tf = apply_t(&spec, &w, &f).unwrap();
            prop_assert!(tf.is_nonnegative());
            let nf = f.norm1(&w, 1.0).unwrap().value.re;
            let ntf = tf.norm1(&w, 1e-15).unwrap();
            prop_assert!((ntf.value.re - nf).abs() <= ntf.radius + 1e-12 * nf.max(1.0));
        }
    }
}
