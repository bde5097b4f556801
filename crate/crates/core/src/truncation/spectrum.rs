use std::cmp::Ordering;
use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{GroupUnionSpec, RootOfUnity, WeightSeq};
use crate::truncation::roots::{find_zeros, Rect};
use crate::truncation::secular::SecularFunction;
use crate::truncation::section::{build_tn, FiniteOperator};
use crate::C64;

/// Largest accepted eigen-residual `‖T_N v - λ v‖_1` for unit `v`.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenKind {
    Block,
    Secular,
}

impl EigenKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EigenKind::Block => "block",
            EigenKind::Secular => "secular",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
    pub kind: EigenKind,
    pub residual: f64,
}

impl Eigenvalue {
    pub fn value(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

/// Angle in `[0, 2π)`, then modulus.
fn angle_then_modulus(a: &Eigenvalue, b: &Eigenvalue) -> Ordering {
    let key = |e: &Eigenvalue| {
        let z = e.value();
        (z.im.atan2(z.re).rem_euclid(TAU), z.norm())
    };
    let (ka, kb) = (key(a), key(b));
    ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    pub orders: Vec<usize>,
    pub depth: usize,
    pub renormalized: bool,
    pub dimension: usize,
    /// `(1 - q̃_n) ζ` for `ζ ≠ 1` in each sub-block, and `1 - q̃_n` once per
    /// sub-block beyond the first (vectors orthogonal to `𝟙` within block `n`).
    pub block_eigs: Vec<Eigenvalue>,
    pub secular_roots: Vec<Eigenvalue>,
    pub max_residual: f64,
    pub max_modulus: f64,
    /// `1 - max |λ|` over secular roots other than the one at `1`.
    pub secular_margin: Option<f64>,
}

impl SpectrumResult {
    /// Every eigenvalue, sorted by angle then modulus.
    pub fn eigenvalues(&self) -> Vec<Eigenvalue> {
        let mut all: Vec<Eigenvalue> = self
            .block_eigs
            .iter()
            .chain(&self.secular_roots)
            .cloned()
            .collect();
        all.sort_by(angle_then_modulus);
        all
    }

    pub fn len(&self) -> usize {
        self.block_eigs.len() + self.secular_roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn distance_to(&self, u: C64) -> f64 {
        self.block_eigs
            .iter()
            .chain(&self.secular_roots)
            .map(|e| (e.value() - u).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

fn eigen(op: &FiniteOperator, lambda: C64, v: &[C64], kind: EigenKind) -> Result<Eigenvalue> {
    let residual = op.residual(lambda, v);
    if !(residual <= EIGEN_RESIDUAL_TOL) {
        return Err(Error::CheckFailed(format!(
            "{} eigenvalue {lambda} has residual {residual:e}",
            kind.as_str()
        )));
    }
    Ok(Eigenvalue { re: lambda.re, im: lambda.im, kind, residual })
}

fn block_eigs(op: &FiniteOperator) -> Result<Vec<Eigenvalue>> {
    let spec = op.spec();
    let d = spec.dim();
    let offsets = spec.offsets();
    let orders = spec.orders();
    let mut out = Vec::new();
    for (idx, &q) in op.section_weights().iter().enumerate() {
        let base = 1 + idx * d;
        let scale = 1.0 - q;
        for (&m, &off) in orders.iter().zip(&offsets) {
            for j in 1..m as u64 {
                // z_i = ζ^{-i} satisfies P z = ζ z on a cycle of length m.
                let zeta = RootOfUnity::new(j, m as u64)?;
                let mut v = vec![C64::new(0.0, 0.0); op.dim()];
                for i in 0..m as u64 {
                    let k = (i * zeta.num()) % zeta.den();
                    v[base + off + i as usize] = RootOfUnity::new(zeta.den() - k, zeta.den())?.to_complex() / m as f64;
                }
                out.push(eigen(op, zeta.to_complex() * scale, &v, EigenKind::Block)?);
            }
        }
        for k in 1..orders.len() {
            let mut v = vec![C64::new(0.0, 0.0); op.dim()];
            let (ma, mb) = (orders[k - 1], orders[k]);
            for i in 0..ma {
                v[base + offsets[k - 1] + i] = C64::new(0.5 / ma as f64, 0.0);
            }
            for i in 0..mb {
                v[base + offsets[k] + i] = C64::new(-0.5 / mb as f64, 0.0);
            }
            out.push(eigen(op, C64::new(scale, 0.0), &v, EigenKind::Block)?);
        }
    }
    Ok(out)
}

/// Full spectrum of `T_N`: closed-form block eigenvalues plus the zeros of
/// the secular function, each validated by an explicit eigenvector.
pub fn eigs_via_secular(spec: &GroupUnionSpec, w: &WeightSeq, n: usize, renormalize: bool) -> Result<SpectrumResult> {
    let op = build_tn(spec, w, n, renormalize)?;
    spectrum_of(&op)
}

pub fn spectrum_of(op: &FiniteOperator) -> Result<SpectrumResult> {
    let mut blocks = block_eigs(op)?;
    let f = SecularFunction::for_section(op);
    let mut secular = Vec::new();
    for z in find_zeros(&f, Rect::covering_disk())? {
        let e = eigen(op, z.value, &f.eigenvector(z.value), EigenKind::Secular)?;
        secular.extend(std::iter::repeat_n(e, z.multiplicity));
    }
    let expected = op.dim();
    let found = blocks.len() + secular.len();
    if found != expected {
        return Err(Error::RootCountMismatch { found, expected });
    }
    blocks.sort_by(angle_then_modulus);
    secular.sort_by(angle_then_modulus);

    let all = blocks.iter().chain(&secular);
    let max_residual = all.clone().map(|e| e.residual).fold(0.0, f64::max);
    let max_modulus = all.map(|e| e.value().norm()).fold(0.0, f64::max);
    let secular_margin = secular
        .iter()
        .filter(|e| (e.value() - 1.0).norm() > 1e-10)
        .map(|e| 1.0 - e.value().norm())
        .reduce(f64::min);
    Ok(SpectrumResult {
        orders: op.spec().orders().to_vec(),
        depth: op.depth(),
        renormalized: op.is_renormalized(),
        dimension: op.dim(),
        block_eigs: blocks,
        secular_roots: secular,
        max_residual,
        max_modulus,
        secular_margin,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub u: String,
    pub distance: f64,
    /// `2 q̃_N`.
    pub bound: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub orders: Vec<usize>,
    pub n_max: usize,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn all_within_bound(&self) -> bool {
        self.rows.iter().all(|r| r.within_bound)
    }
}

/// `dist(u, σ(T_N))` for every `u ∈ U` and `N = 1..=n_max`, renormalised sections.
pub fn spectrum_convergence(spec: &GroupUnionSpec, w: &WeightSeq, n_max: usize) -> Result<ConvergenceTable> {
    if n_max < 2 {
        return Err(Error::Invalid(format!("nmax: must be >= 2, got {n_max}")));
    }
    let points = spec.union_points();
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let op = build_tn(spec, w, n, true)?;
        let bound = 2.0 * op.section_weights()[n - 1];
        let s = spectrum_of(&op)?;
        for u in &points {
            let distance = s.distance_to(u.to_complex());
            rows.push(ConvergenceRow {
                n,
                u: u.to_string(),
                distance,
                bound,
                within_bound: distance <= bound,
            });
        }
    }
    Ok(ConvergenceTable { orders: spec.orders().to_vec(), n_max, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::rng::substream;
    use rand::Rng;

    fn setup(orders: &[usize]) -> (GroupUnionSpec, WeightSeq) {
        let s = GroupUnionSpec::new(orders.to_vec()).unwrap();
        let w = WeightSeq::dyadic(s.dim());
        (s, w)
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn swap_matrix() {
        let (s, w) = setup(&[1]);
        let r = eigs_via_secular(&s, &w, 1, true).unwrap();
        assert!(r.block_eigs.is_empty());
        let vals: Vec<C64> = r.eigenvalues().iter().map(|e| e.value()).collect();
        assert_eq!(vals.len(), 2);
        assert!((vals[0] - 1.0).norm() < 1e-15);
        assert!((vals[1] + 1.0).norm() < 1e-15);
    }

    #[test]
    fn block_eigs_closed_form() {
        let (s, w) = setup(&[2, 3]);
        let n = 4;
        let r = eigs_via_secular(&s, &w, n, true).unwrap();
        let q = crate::truncation::section::section_weights(&w, n, true);
        for qn in q {
            for zeta in [c(-1.0, 0.0), C64::from_polar(1.0, TAU / 3.0), C64::from_polar(1.0, -TAU / 3.0)] {
                let target = zeta * (1.0 - qn);
                assert!(r.block_eigs.iter().any(|e| (e.value() - target).norm() < 1e-15));
            }
        }
        // 4 non-trivial roots and one extra 1 - q̃_n per block, secular N+1.
        assert_eq!(r.block_eigs.len(), n * 4);
        assert_eq!(r.secular_roots.len(), n + 1);
    }

    /// Multiset comparison against nalgebra's Schur-based eigenvalues.
    #[test]
    fn matches_dense_eigensolver() {
        for (orders, n) in [(vec![2, 3], 3), (vec![1], 5), (vec![3, 3], 2), (vec![4, 6], 2), (vec![2], 6)] {
            let (s, w) = setup(&orders);
            for renormalize in [true, false] {
                let op = build_tn(&s, &w, n, renormalize).unwrap();
                let ours = spectrum_of(&op).unwrap().eigenvalues();
                let mut theirs: Vec<C64> = op.matrix().complex_eigenvalues().iter().copied().collect();
                assert_eq!(ours.len(), theirs.len());
                for e in &ours {
                    let (idx, dist) = theirs
                        .iter()
                        .enumerate()
                        .map(|(i, z)| (i, (z - e.value()).norm()))
                        .min_by(|a, b| a.1.total_cmp(&b.1))
                        .unwrap();
                    assert!(dist < 1e-7, "{orders:?} N={n}: {} unmatched ({dist:e})", e.value());
                    theirs.swap_remove(idx);
                }
            }
        }
    }

    /// Power iterates converge to the Perron vector at the rate of the
    /// second-largest modulus, which rules out a missed peripheral eigenvalue.
    #[test]
    fn perron_root_is_dominant() {
        for (orders, n) in [(vec![2, 3], 2), (vec![2, 3], 3), (vec![1], 3), (vec![4, 6], 1), (vec![3], 2)] {
            let (s, w) = setup(&orders);
            let op = build_tn(&s, &w, n, true).unwrap();
            let r = spectrum_of(&op).unwrap();
            let rho = r
                .eigenvalues()
                .iter()
                .map(|e| e.value())
                .filter(|z| (z - 1.0).norm() > 1e-10)
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(rho < 1.0);
            let perron = SecularFunction::for_section(&op).eigenvector(c(1.0, 0.0));
            let mut rng = substream(11, "power-iteration");
            let mut x: Vec<C64> = (0..op.dim()).map(|_| c(rng.gen::<f64>() + 0.1, 0.0)).collect();
            let mass: f64 = x.iter().map(|z| z.re).sum();
            x.iter_mut().for_each(|z| *z /= mass);
            let steps = ((1e-13f64).ln() / rho.ln()).ceil() as usize + 50;
            for _ in 0..steps {
                x = op.apply(&x);
            }
            let err: f64 = x.iter().zip(&perron).map(|(a, b)| (a - b).norm()).sum();
            assert!(err < 1e-10, "{orders:?} N={n}: {err:e}");
        }
    }

    #[test]
    fn unique_peripheral_root_except_the_swap() {
        for orders in [vec![1], vec![2], vec![2, 3], vec![4, 6]] {
            let (s, w) = setup(&orders);
            for n in 1..=6 {
                let r = eigs_via_secular(&s, &w, n, true).unwrap();
                assert!(r.max_modulus <= 1.0 + 1e-10);
                let peripheral: Vec<C64> = r
                    .eigenvalues()
                    .iter()
                    .map(|e| e.value())
                    .filter(|z| z.norm() >= 1.0 - 1e-10)
                    .collect();
                if orders == [1] && n == 1 {
                    assert_eq!(peripheral.len(), 2);
                } else {
                    assert_eq!(peripheral.len(), 1, "{orders:?} N={n}");
                    assert!((peripheral[0] - 1.0).norm() < 1e-10);
                    assert!(r.secular_margin.unwrap() > 0.0);
                }
            }
        }
    }

    #[test]
    fn convergence_table() {
        let (s, w) = setup(&[2, 3]);
        let t = spectrum_convergence(&s, &w, 10).unwrap();
        assert!(t.all_within_bound());
        for row in &t.rows {
            match row.u.as_str() {
                "0/1" => assert!(row.distance < 1e-15),
                "1/2" => assert!(row.distance <= row.bound / 2.0 + 1e-15),
                _ => {}
            }
        }
        let third = t.rows.iter().find(|r| r.n == 10 && r.u == "1/3").unwrap();
        assert!(third.distance <= 1.96e-4);
        assert!(spectrum_convergence(&s, &w, 1).is_err());
    }
}
