//! Trajectories of the semigroup generated by `A`.
//!
//! Modes `k ≠ 0` decouple from both rank-one terms and evolve in closed
//! form. The head and the mode-0 coefficients of blocks `1..=N` form a
//! chain with generator
//!
//! `head' = -head + Σ 2π q_n f_n0`, `f_n0' = q_n head - q_n f_n0`,
//!
//! propagated by a dense matrix exponential. Mode-0 content beyond `N`
//! only decays; the chain leaks mass at rate `2^-N · head`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::semigroup::generator::GeneratorSpec;
use crate::semigroup::state::FourierState;
use crate::C64;

pub const DEFAULT_CHAIN_DEPTH: usize = 40;

/// The `(N+1) × (N+1)` generator of the head + mode-0 chain.
pub fn chain_generator(g: &GeneratorSpec, depth: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(depth + 1, depth + 1);
    m[(0, 0)] = -1.0;
    for n in 1..=depth {
        let q = g.q(n);
        m[(0, n)] = g.weights().mass(n);
        m[(n, 0)] = q;
        m[(n, n)] = -q;
    }
    m
}

fn check(t: f64, depth: usize) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Invalid(format!("t: must be finite and >= 0, got {t}")));
    }
    if depth == 0 {
        return Err(Error::Invalid("chain depth: must be >= 1".into()));
    }
    Ok(())
}

/// Propagator for a fixed time.
pub struct Propagator<'a> {
    g: &'a GeneratorSpec,
    t: f64,
    depth: usize,
    chain: DMatrix<f64>,
}

impl<'a> Propagator<'a> {
    pub fn new(g: &'a GeneratorSpec, t: f64, depth: usize) -> Result<Self> {
        check(t, depth)?;
        let chain = (chain_generator(g, depth) * t).exp();
        Ok(Self { g, t, depth, chain })
    }

    pub fn chain(&self) -> &DMatrix<f64> {
        &self.chain
    }

    pub fn apply(&self, f: &FourierState) -> FourierState {
        let n = self.depth;
        let mut x = DVector::from_element(n + 1, C64::new(0.0, 0.0));
        x[0] = f.head;
        for k in 1..=n {
            x[k] = f.get(k, 0);
        }
        let y = self.chain.map(|v| C64::new(v, 0.0)) * x;

        let mut out = FourierState { head: y[0], ..FourierState::zero() };
        for (blk, k, c) in f.modes() {
            if k == 0 && blk <= n {
                continue;
            }
            let rate = C64::new(-self.g.q(blk), self.g.omega(blk) * k as f64);
            out.set(blk, k, c * (rate * self.t).exp());
        }
        for k in 1..=n {
            if y[k] != C64::new(0.0, 0.0) || f.get(k, 0) != C64::new(0.0, 0.0) {
                out.set(k, 0, y[k]);
            }
        }
        out
    }
}

pub fn evolve(g: &GeneratorSpec, f0: &FourierState, t: f64, depth: usize) -> Result<FourierState> {
    Ok(Propagator::new(g, t, depth)?.apply(f0))
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub mass: f64,
    pub head: f64,
    pub block_masses: Vec<f64>,
    /// Smallest real part over head and chain coefficients.
    pub min_entry: f64,
}

/// Samples `f(t)` at each time; rows report `‖f(t)‖` and `2π |f_n0(t)|`.
pub fn trajectory(g: &GeneratorSpec, f0: &FourierState, times: &[f64], depth: usize) -> Result<Vec<TrajectoryRow>> {
    times
        .iter()
        .map(|&t| {
            let f = evolve(g, f0, t, depth)?;
            let chain = std::iter::once(f.head).chain((1..=depth).map(|n| f.get(n, 0)));
            Ok(TrajectoryRow {
                t,
                mass: f.norm(),
                head: f.head.re,
                block_masses: f.block_masses(depth).iter().map(|m| m.norm()).collect(),
                min_entry: chain.map(|c| c.re).fold(f64::INFINITY, f64::min),
            })
        })
        .collect()
}

/// `0, t/steps, …, t`.
pub fn uniform_times(t: f64, steps: usize) -> Vec<f64> {
    let steps = steps.max(1);
    (0..=steps).map(|i| t * i as f64 / steps as f64).collect()
}
