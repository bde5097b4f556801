//! Characteristic polynomial cross-check by exact cofactor expansion.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::rng::substream;
use crate::model::{GroupUnionSpec, WeightSeq};
use crate::truncation::section::build_tn;
use crate::truncation::spectrum::spectrum_of;
use crate::C64;

/// Largest matrix the expansion accepts (`2^n` partial sums).
pub const MAX_EXPANSION_DIM: usize = 20;

/// Relative agreement required between the two evaluations.
pub const IDENTITY_TOL: f64 = 1e-8;

/// Laplace expansion along rows, memoised over the set of used columns:
/// `D[S]` is the signed sum over injective assignments of the first `|S|`
/// rows onto the columns `S`.
pub fn det_by_expansion(a: &DMatrix<C64>) -> C64 {
    let n = a.nrows();
    assert!(a.is_square() && n <= MAX_EXPANSION_DIM);
    let mut partial = vec![C64::new(0.0, 0.0); 1 << n];
    partial[0] = C64::new(1.0, 0.0);
    for mask in 0usize..(1 << n) {
        let acc = partial[mask];
        if acc == C64::new(0.0, 0.0) {
            continue;
        }
        let row = mask.count_ones() as usize;
        if row == n {
            continue;
        }
        for col in 0..n {
            if mask & (1 << col) != 0 {
                continue;
            }
            let entry = a[(row, col)];
            if entry == C64::new(0.0, 0.0) {
                continue;
            }
            // Inversions added: used columns to the right of `col`.
            let sign = if (mask >> (col + 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            partial[mask | (1 << col)] += acc * entry * sign;
        }
    }
    partial[(1 << n) - 1]
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorizationCheck {
    pub orders: Vec<usize>,
    pub depth: usize,
    pub samples: usize,
    pub max_relative_error: f64,
    pub passed: bool,
}

/// Compares `det(λ - T_N)` by cofactor expansion with `Π (λ - λ_i)` over the
/// computed spectrum at `2(1 + Nd)` random points.
pub fn factorization_cross_check(
    spec: &GroupUnionSpec,
    w: &WeightSeq,
    n: usize,
    seed: u64,
) -> Result<FactorizationCheck> {
    let op = build_tn(spec, w, n, true)?;
    if n > 3 || spec.dim() > 5 {
        return Err(Error::Invalid(format!(
            "cofactor cross-check is limited to N <= 3 and d <= 5 (got N = {n}, d = {})",
            spec.dim()
        )));
    }
    let eigs: Vec<C64> = spectrum_of(&op)?.eigenvalues().iter().map(|e| e.value()).collect();
    let dim = op.dim();
    let t = op.matrix().map(|x| C64::new(x, 0.0));
    let mut rng = substream(seed, &format!("cofactor/{:?}/{n}", spec.orders()));
    let samples = 2 * dim;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let lambda = C64::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(0.0..std::f64::consts::TAU));
        let shifted = DMatrix::from_diagonal_element(dim, dim, lambda) - &t;
        let det = det_by_expansion(&shifted);
        let prod: C64 = eigs.iter().map(|mu| lambda - mu).product();
        let scale = det.norm().max(prod.norm()).max(f64::MIN_POSITIVE);
        worst = worst.max((det - prod).norm() / scale);
    }
    Ok(FactorizationCheck {
        orders: spec.orders().to_vec(),
        depth: n,
        samples,
        max_relative_error: worst,
        passed: worst <= IDENTITY_TOL,
    })
}
