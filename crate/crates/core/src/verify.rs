//! Seeded property suites bundled behind the `verify` command.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::rng::substream;
use crate::model::{stochasticity_check, GroupUnionSpec, WeightSeq};
use crate::resolvent::dense::{action_matrix, DenseFunctional, DenseResolvent};
use crate::resolvent::{circles_inequality, RankOneUpdate, ShermanMorrison};
use crate::truncation::cofactor::IDENTITY_TOL;
use crate::truncation::{build_tn, factorization_cross_check, strongly_connected};
use crate::C64;

pub const SUITES: [&str; 5] = ["sherman-morrison", "circles", "stochasticity", "connectivity", "factorization"];

pub const SM_CASES: usize = 200;
pub const SM_ENTRY_TOL: f64 = 1e-10;
pub const SM_SINGULAR_TOL: f64 = 1e-8;
/// Cases whose shifted matrices are worse conditioned than this are redrawn.
pub const SM_MAX_CONDITION: f64 = 1e6;
pub const CIRCLES_SAMPLES: usize = 100_000;
pub const STOCHASTICITY_TRIALS: usize = 200;
pub const STOCHASTICITY_TOL: f64 = 1e-12;
pub const COLUMN_SUM_TOL: f64 = 1e-12;

const STOCHASTICITY_ORDERS: [&[usize]; 6] = [&[1], &[2], &[3], &[2, 3], &[4, 6], &[1, 4]];
const FACTORIZATION_ORDERS: [&[usize]; 6] = [&[1], &[2], &[3], &[2, 3], &[5], &[1, 4]];

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    pub suites: Vec<String>,
    /// Test hook: perturbs the rank-one resolvent before comparison.
    pub inject_fault: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub failures: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    pub failed: Vec<String>,
    pub passed: bool,
}

pub fn run(opts: &VerifyOptions) -> Result<VerifyReport> {
    if let Some(s) = opts.suites.iter().find(|s| !SUITES.contains(&s.as_str())) {
        return Err(Error::Invalid(format!("suites: unknown suite {s:?}")));
    }
    let selected: Vec<&str> = SUITES
        .iter()
        .copied()
        .filter(|s| opts.suites.iter().any(|x| x == s))
        .collect();
    let suites = selected
        .par_iter()
        .map(|&name| run_suite(name, opts))
        .collect::<Result<Vec<_>>>()?;
    let failed: Vec<String> = suites.iter().filter(|s| !s.passed).map(|s| s.name.clone()).collect();
    Ok(VerifyReport {
        seed: opts.seed,
        passed: failed.is_empty(),
        failed,
        suites,
    })
}

fn run_suite(name: &str, opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut rng = substream(opts.seed, &format!("verify/{name}"));
    match name {
        "sherman-morrison" => sherman_morrison_suite(&mut rng, opts.inject_fault),
        "circles" => circles_suite(&mut rng),
        "stochasticity" => stochasticity_suite(opts.seed),
        "connectivity" => connectivity_suite(),
        "factorization" => factorization_suite(opts.seed),
        _ => unreachable!("suite names are validated"),
    }
}

fn random_c64(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn condition(m: &DMatrix<C64>) -> f64 {
    let s = m.singular_values();
    let (lo, hi) = (s.min(), s.max());
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

struct SmCase {
    a: DMatrix<C64>,
    w: DVector<C64>,
    phi: DVector<C64>,
    lambda: C64,
    singular: bool,
}

/// Draws a well-conditioned case; a quarter are made singular by scaling `φ`
/// so that `⟨φ, R(λ,A) w⟩ = 1`.
fn draw_sm_case(rng: &mut ChaCha8Rng) -> SmCase {
    loop {
        let n = rng.gen_range(1..=6);
        let a = DMatrix::from_fn(n, n, |_, _| random_c64(rng));
        let w = DVector::from_fn(n, |_, _| random_c64(rng));
        let mut phi = DVector::from_fn(n, |_, _| random_c64(rng));
        let lambda = random_c64(rng) * 2.0;
        let singular = rng.gen_bool(0.25);
        let shifted = DMatrix::from_diagonal_element(n, n, lambda) - &a;
        if condition(&shifted) > SM_MAX_CONDITION {
            continue;
        }
        if singular {
            let Some(rw) = shifted.clone().lu().solve(&w) else { continue };
            let gamma: C64 = phi.iter().zip(rw.iter()).map(|(x, y)| x * y).sum();
            if gamma.norm() < 1e-3 {
                continue;
            }
            phi /= gamma;
        } else {
            let updated = &shifted - &w * phi.transpose();
            if condition(&updated) > SM_MAX_CONDITION {
                continue;
            }
        }
        return SmCase { a, w, phi, lambda, singular };
    }
}

fn sherman_morrison_suite(rng: &mut ChaCha8Rng, inject_fault: bool) -> Result<SuiteResult> {
    let mut failures = 0;
    let mut max_error: f64 = 0.0;
    for _ in 0..SM_CASES {
        let case = draw_sm_case(rng);
        let n = case.a.nrows();
        let base = DenseResolvent::new(&case.a, case.lambda)?;
        let update = RankOneUpdate {
            vector: case.w.clone(),
            functional: DenseFunctional(case.phi.clone()),
        };
        let sm = ShermanMorrison::new(base, update, SM_SINGULAR_TOL);

        // Determinant oracle: det(λ - A - w φᵀ) relative to det(λ - A).
        let shifted = DMatrix::from_diagonal_element(n, n, case.lambda) - &case.a;
        let updated = &shifted - &case.w * case.phi.transpose();
        let det_ratio = (updated.determinant() / shifted.determinant()).norm();
        let oracle_singular = det_ratio <= SM_SINGULAR_TOL;
        if oracle_singular != case.singular {
            failures += 1;
            continue;
        }
        match sm {
            Err(Error::SingularUpdate { .. }) => {
                if !oracle_singular {
                    failures += 1;
                }
            }
            Err(e) => return Err(e),
            Ok(sm) => {
                if oracle_singular {
                    failures += 1;
                    continue;
                }
                let mut got = action_matrix(&sm, n)?;
                if inject_fault {
                    got[(0, 0)] += C64::new(1e-6, 0.0);
                }
                let want = updated
                    .try_inverse()
                    .ok_or_else(|| Error::CheckFailed("dense inverse failed".into()))?;
                let scale = want.iter().map(|z| z.norm()).fold(1.0, f64::max);
                let err = (got - want).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale;
                max_error = max_error.max(err);
                if err > SM_ENTRY_TOL {
                    failures += 1;
                }
            }
        }
    }
    Ok(SuiteResult {
        name: "sherman-morrison".into(),
        passed: failures == 0,
        cases: SM_CASES,
        failures,
        max_error,
        tolerance: SM_ENTRY_TOL,
    })
}

/// `max_error` is the largest `p - |λ - 1 + p|`, which must stay negative.
fn circles_suite(rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut failures = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut cases = 0;
    while cases < CIRCLES_SAMPLES {
        let p: f64 = rng.gen_range(0.0..1.0);
        let lambda = C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
        if lambda == C64::new(1.0, 0.0) {
            continue;
        }
        cases += 1;
        worst = worst.max(p - (lambda - 1.0 + p).norm());
        if !circles_inequality(p, lambda)? {
            failures += 1;
        }
    }
    Ok(SuiteResult {
        name: "circles".into(),
        passed: failures == 0,
        cases,
        failures,
        max_error: worst,
        tolerance: 0.0,
    })
}

fn stochasticity_suite(seed: u64) -> Result<SuiteResult> {
    let mut failures = 0;
    let mut max_error: f64 = 0.0;
    for orders in STOCHASTICITY_ORDERS {
        let spec = GroupUnionSpec::new(orders.to_vec())?;
        let w = WeightSeq::dyadic(spec.dim());
        let r = stochasticity_check(&spec, &w, STOCHASTICITY_TRIALS, seed)?;
        max_error = max_error.max(r.max_violation);
        if !r.passed(STOCHASTICITY_TOL) {
            failures += 1;
        }
    }
    Ok(SuiteResult {
        name: "stochasticity".into(),
        passed: failures == 0,
        cases: STOCHASTICITY_ORDERS.len(),
        failures,
        max_error,
        tolerance: STOCHASTICITY_TOL,
    })
}

/// Vertices reachable from 0 along `a_ij > 0` read as `j → i`, or against it.
fn reach_from_zero(a: &DMatrix<f64>, forward: bool) -> usize {
    let n = a.nrows();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(j) = queue.pop_front() {
        for i in 0..n {
            let edge = if forward { a[(i, j)] } else { a[(j, i)] };
            if edge > 0.0 && !seen[i] {
                seen[i] = true;
                queue.push_back(i);
            }
        }
    }
    seen.iter().filter(|&&s| s).count()
}

fn bfs_strongly_connected(a: &DMatrix<f64>) -> bool {
    reach_from_zero(a, true) == a.nrows() && reach_from_zero(a, false) == a.nrows()
}

/// Every finite section is non-negative, column stochastic and strongly
/// connected, matching a BFS oracle; a decoupled control must be flagged.
fn connectivity_suite() -> Result<SuiteResult> {
    let mut failures = 0;
    let mut cases = 0;
    let mut max_error: f64 = 0.0;
    for orders in STOCHASTICITY_ORDERS {
        let spec = GroupUnionSpec::new(orders.to_vec())?;
        let w = WeightSeq::dyadic(spec.dim());
        for n in 1..=8 {
            cases += 1;
            let op = build_tn(&spec, &w, n, true)?;
            let c = op.checks();
            max_error = max_error.max(c.max_column_sum_deviation);
            let oracle = bfs_strongly_connected(op.matrix());
            if !c.nonnegative || !c.strongly_connected || !oracle || c.max_column_sum_deviation > COLUMN_SUM_TOL {
                failures += 1;
            }
        }
    }
    // Two copies of a section with no coupling between them.
    cases += 1;
    let spec = GroupUnionSpec::new(vec![2, 3])?;
    let op = build_tn(&spec, &WeightSeq::dyadic(5), 3, true)?;
    let m = op.matrix();
    let k = m.nrows();
    let mut control = DMatrix::zeros(2 * k, 2 * k);
    control.view_mut((0, 0), (k, k)).copy_from(m);
    control.view_mut((k, k), (k, k)).copy_from(m);
    if strongly_connected(&control) || bfs_strongly_connected(&control) {
        failures += 1;
    }
    Ok(SuiteResult {
        name: "connectivity".into(),
        passed: failures == 0,
        cases,
        failures,
        max_error,
        tolerance: COLUMN_SUM_TOL,
    })
}

fn factorization_suite(seed: u64) -> Result<SuiteResult> {
    let jobs: Vec<(&[usize], usize)> = FACTORIZATION_ORDERS
        .iter()
        .flat_map(|&o| (1..=3).map(move |n| (o, n)))
        .collect();
    let checks = jobs
        .par_iter()
        .map(|&(orders, n)| {
            let spec = GroupUnionSpec::new(orders.to_vec())?;
            factorization_cross_check(&spec, &WeightSeq::dyadic(spec.dim()), n, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    let failures = checks.iter().filter(|c| !c.passed).count();
    Ok(SuiteResult {
        name: "factorization".into(),
        passed: failures == 0,
        cases: checks.len(),
        failures,
        max_error: checks.iter().map(|c| c.max_relative_error).fold(0.0, f64::max),
        tolerance: IDENTITY_TOL,
    })
}
