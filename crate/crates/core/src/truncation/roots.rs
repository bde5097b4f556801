//! Zeros of the secular function by the argument principle.
//!
//! The winding number of `φ_N` around a rectangle is `(1/2πi) ∮ φ'/φ`,
//! evaluated by the trapezoidal rule on each edge. Zeros inside equal the
//! winding number plus the poles inside. Rectangles are quadrisected until
//! each holds one zero, which Newton's method then refines.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::truncation::secular::{SecularFunction, POLE_GUARD};
use crate::C64;

/// Trapezoidal nodes per edge on the first attempt.
pub const BASE_NODES: usize = 1 << 10;
/// Node budget per edge before a contour is declared unusable.
pub const MAX_NODES: usize = 1 << 16;
/// Winding numbers must land this close to an integer.
pub const WINDING_TOL: f64 = 0.1;
/// Required `|φ_N|` at an accepted root.
pub const NEWTON_TOL: f64 = 1e-12;
/// Rectangles smaller than this are not split further.
pub const MIN_SIDE: f64 = 1e-11;

/// Split positions tried in turn, kept away from one half so that split
/// lines do not line up with the real axis or with each other.
const SPLITS: [(f64, f64); 6] = [
    (0.47, 0.53),
    (0.53, 0.41),
    (0.41, 0.59),
    (0.59, 0.37),
    (0.37, 0.63),
    (0.61, 0.29),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        assert!(x0 < x1 && y0 < y1, "degenerate rectangle");
        Self { x0, x1, y0, y1 }
    }

    /// Covers the disk `|λ| ≤ 1.1`; slightly off-centre so no edge or
    /// first split sits on a symmetry line.
    pub fn covering_disk() -> Self {
        Self::new(-1.13, 1.17, -1.11, 1.19)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn center(&self) -> C64 {
        C64::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re > self.x0 && z.re < self.x1 && z.im > self.y0 && z.im < self.y1
    }

    pub fn grow(&self, by: f64) -> Self {
        Self::new(self.x0 - by, self.x1 + by, self.y0 - by, self.y1 + by)
    }

    pub fn distance_to_boundary(&self, z: C64) -> f64 {
        let dx = if z.re < self.x0 {
            self.x0 - z.re
        } else if z.re > self.x1 {
            z.re - self.x1
        } else {
            0.0
        };
        let dy = if z.im < self.y0 {
            self.y0 - z.im
        } else if z.im > self.y1 {
            z.im - self.y1
        } else {
            0.0
        };
        if dx > 0.0 || dy > 0.0 {
            return dx.hypot(dy);
        }
        (z.re - self.x0)
            .min(self.x1 - z.re)
            .min(z.im - self.y0)
            .min(self.y1 - z.im)
    }

    /// Corners counter-clockwise from the lower left.
    fn corners(&self) -> [C64; 4] {
        [
            C64::new(self.x0, self.y0),
            C64::new(self.x1, self.y0),
            C64::new(self.x1, self.y1),
            C64::new(self.x0, self.y1),
        ]
    }

    pub fn split(&self, fx: f64, fy: f64) -> [Rect; 4] {
        let xm = self.x0 + fx * self.width();
        let ym = self.y0 + fy * self.height();
        [
            Rect::new(self.x0, xm, self.y0, ym),
            Rect::new(xm, self.x1, self.y0, ym),
            Rect::new(self.x0, xm, ym, self.y1),
            Rect::new(xm, self.x1, ym, self.y1),
        ]
    }
}

fn contour_integral(f: &SecularFunction, r: &Rect, nodes: usize) -> C64 {
    let c = r.corners();
    let mut total = C64::new(0.0, 0.0);
    for k in 0..4 {
        let (a, b) = (c[k], c[(k + 1) % 4]);
        let h = (b - a) / nodes as f64;
        let log_deriv = |z: C64| {
            let (v, dv) = f.eval_unchecked(z);
            dv / v
        };
        let mut s = 0.5 * (log_deriv(a) + log_deriv(b));
        for j in 1..nodes {
            s += log_deriv(a + h * j as f64);
        }
        total += s * h;
    }
    total
}

/// Winding number of `φ_N` around `r`, or `None` when the quadrature does not
/// settle on an integer within the node budget (a zero or pole is too close
/// to the contour).
pub fn winding_number(f: &SecularFunction, r: &Rect) -> Option<i64> {
    let scale = r.width().min(r.height());
    if f
        .poles()
        .iter()
        .any(|&p| r.distance_to_boundary(C64::new(p, 0.0)) <= 1e-6 * scale)
    {
        return None;
    }
    let mut nodes = BASE_NODES;
    let mut previous = None;
    while nodes <= MAX_NODES {
        let w = contour_integral(f, r, nodes) / C64::new(0.0, TAU);
        if !w.re.is_finite() || !w.im.is_finite() {
            return None;
        }
        let k = w.re.round();
        if (w.re - k).abs() <= WINDING_TOL && w.im.abs() <= WINDING_TOL {
            // Two consecutive resolutions must agree.
            if previous == Some(k as i64) {
                return previous;
            }
            previous = Some(k as i64);
        } else {
            previous = None;
        }
        nodes *= 2;
    }
    None
}

/// Zeros of `φ_N` inside `r` with multiplicity.
pub fn zero_count(f: &SecularFunction, r: &Rect) -> Option<i64> {
    let poles = f
        .poles()
        .iter()
        .filter(|&&p| r.contains(C64::new(p, 0.0)))
        .count() as i64;
    winding_number(f, r).map(|w| w + poles)
}

fn newton_step_loop(f: &SecularFunction, mut z: C64) -> Option<C64> {
    for _ in 0..200 {
        let (v, dv) = f.eval_unchecked(z);
        if !v.re.is_finite() || !dv.re.is_finite() || dv.norm() == 0.0 {
            return None;
        }
        let step = v / dv;
        z -= step;
        if step.norm() <= 4.0 * f64::EPSILON * z.norm().max(1.0) {
            break;
        }
    }
    let (_, dist) = f.nearest_pole(z);
    if dist <= POLE_GUARD {
        return None;
    }
    Some(z)
}

/// Newton's method on `φ_N`. The zeros are real (the imaginary part of
/// `λ - g(λ)` is `Im λ · (1 + Σ d q̃²/|λ - 1 + q̃|²)`), so a converged iterate
/// with negligible imaginary part is polished on the real line.
pub fn newton(f: &SecularFunction, z0: C64) -> Option<C64> {
    let mut z = newton_step_loop(f, z0)?;
    if z.im.abs() <= 1e-10 * z.norm().max(1.0) {
        z = newton_step_loop(f, C64::new(z.re, 0.0))?;
    }
    let v = f.value(z).ok()?;
    (v.norm() <= NEWTON_TOL).then_some(z)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zero {
    pub value: C64,
    pub multiplicity: usize,
}

fn isolate(f: &SecularFunction, r: Rect, count: i64, out: &mut Vec<Zero>) -> Result<()> {
    if count <= 0 {
        return Ok(());
    }
    if count == 1 {
        if let Some(z) = newton(f, r.center()) {
            if r.contains(z) {
                out.push(Zero { value: z, multiplicity: 1 });
                return Ok(());
            }
        }
    }
    if r.width().max(r.height()) < MIN_SIDE {
        let z = newton(f, r.center()).ok_or_else(|| {
            Error::CheckFailed(format!("Newton failed in a cluster of {count} zeros at {}", r.center()))
        })?;
        out.push(Zero { value: z, multiplicity: count as usize });
        return Ok(());
    }
    for (fx, fy) in SPLITS {
        let children = r.split(fx, fy);
        let counts: Option<Vec<i64>> = children.iter().map(|c| zero_count(f, c)).collect();
        match counts {
            Some(cs) if cs.iter().sum::<i64>() == count && cs.iter().all(|&c| c >= 0) => {
                for (child, c) in children.into_iter().zip(cs) {
                    isolate(f, child, c, out)?;
                }
                return Ok(());
            }
            _ => continue,
        }
    }
    Err(Error::CheckFailed(format!(
        "argument principle did not converge on any subdivision of [{}, {}] x [{}, {}]",
        r.x0, r.x1, r.y0, r.y1
    )))
}

/// All zeros of `φ_N` inside `r`.
pub fn find_zeros(f: &SecularFunction, r: Rect) -> Result<Vec<Zero>> {
    let count = zero_count(f, &r)
        .ok_or_else(|| Error::CheckFailed("argument principle did not converge on the outer contour".into()))?;
    let mut out = Vec::new();
    isolate(f, r, count, &mut out)?;
    Ok(out)
}
