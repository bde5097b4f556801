//! Complex values with an error radius.
//!
//! A [`CertifiedComplex`] stands for every complex number in the closed disk
//! `|z - value| <= radius`. The radius accounts for truncation of infinite
//! sums; floating-point rounding in the partial sums is not tracked.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifiedComplex {
    #[serde(serialize_with = "ser_complex")]
    pub value: C64,
    pub radius: f64,
}

fn ser_complex<S: serde::Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("Complex", 2)?;
    st.serialize_field("re", &z.re)?;
    st.serialize_field("im", &z.im)?;
    st.end()
}

impl CertifiedComplex {
    pub fn new(value: C64, radius: f64) -> Self {
        debug_assert!(radius >= 0.0 || radius.is_nan());
        Self { value, radius }
    }

    pub fn exact(value: C64) -> Self {
        Self { value, radius: 0.0 }
    }

    pub fn real(value: f64, radius: f64) -> Self {
        Self::new(C64::new(value, 0.0), radius)
    }

    /// Whether `z` lies in the closed disk.
    pub fn contains(&self, z: C64) -> bool {
        (self.value - z).norm() <= self.radius
    }

    pub fn excludes_zero(&self) -> bool {
        !self.contains(C64::new(0.0, 0.0))
    }

    /// Largest modulus over the disk.
    pub fn abs_upper(&self) -> f64 {
        self.value.norm() + self.radius
    }

    /// Smallest modulus over the disk (zero if the disk contains 0).
    pub fn abs_lower(&self) -> f64 {
        (self.value.norm() - self.radius).max(0.0)
    }

    /// Whether this disk lies inside `outer` (with a relative slack for rounding).
    pub fn is_within(&self, outer: &CertifiedComplex, slack: f64) -> bool {
        (self.value - outer.value).norm() + self.radius <= outer.radius + slack
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.value * s, self.radius * s.norm())
    }

    /// Reciprocal; fails when the disk touches zero.
    pub fn recip(&self) -> Result<Self> {
        let m = self.value.norm();
        if m <= self.radius {
            return Err(Error::Invalid(format!(
                "division by a disk containing zero (|value| = {m:e}, radius = {:e})",
                self.radius
            )));
        }
        Ok(Self::new(
            self.value.inv(),
            self.radius / (m * (m - self.radius)),
        ))
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        Ok(*self * rhs.recip()?)
    }
}

impl Add for CertifiedComplex {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.value + rhs.value, self.radius + rhs.radius)
    }
}

impl Sub for CertifiedComplex {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.value - rhs.value, self.radius + rhs.radius)
    }
}

impl Neg for CertifiedComplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.value, self.radius)
    }
}

impl Mul for CertifiedComplex {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let r = self.value.norm() * rhs.radius
            + rhs.value.norm() * self.radius
            + self.radius * rhs.radius;
        Self::new(self.value * rhs.value, r)
    }
}

impl fmt::Display for CertifiedComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {:e}", self.value, self.radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn disk() -> impl Strategy<Value = CertifiedComplex> {
        (-3.0..3.0f64, -3.0..3.0f64, 0.0..0.5f64)
            .prop_map(|(re, im, r)| CertifiedComplex::new(C64::new(re, im), r))
    }

    // Sample a point of the disk by polar offset.
    fn point(d: &CertifiedComplex, t: f64, s: f64) -> C64 {
        d.value + C64::from_polar(d.radius * s, t)
    }

    proptest! {
        #[test]
        fn product_encloses_pointwise_products(a in disk(), b in disk(),
            t1 in 0.0..6.3f64, s1 in 0.0..1.0f64, t2 in 0.0..6.3f64, s2 in 0.0..1.0f64) {
            let x = point(&a, t1, s1);
            let y = point(&b, t2, s2);
            let p = a * b;
            prop_assert!((x * y - p.value).norm() <= p.radius + 1e-12);
            let s = a + b;
            prop_assert!((x + y - s.value).norm() <= s.radius + 1e-12);
        }

        #[test]
        fn reciprocal_encloses(a in disk(), t in 0.0..6.3f64, s in 0.0..1.0f64) {
            prop_assume!(a.value.norm() > a.radius + 1e-3);
            let x = point(&a, t, s);
            let r = a.recip().unwrap();
            prop_assert!((x.inv() - r.value).norm() <= r.radius * (1.0 + 1e-9) + 1e-12);
        }
    }

    #[test]
    fn reciprocal_of_disk_around_zero_fails() {
        let d = CertifiedComplex::real(1e-3, 2e-3);
        assert!(d.recip().is_err());
        assert!(!d.excludes_zero());
    }

    #[test]
    fn exact_values_have_zero_radius() {
        let a = CertifiedComplex::exact(C64::new(1.0, 2.0));
        let b = CertifiedComplex::exact(C64::new(-0.5, 0.25));
        assert_eq!((a * b).radius, 0.0);
        assert_eq!((a - b).radius, 0.0);
    }
}
