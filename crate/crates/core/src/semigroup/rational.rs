//! A schedule `ω_1, ω_2, …` visiting every rational in `[1, 2]` infinitely often.
//!
//! The base list is `1, 2`, then `p/s` in lowest terms with `s < p < 2s`,
//! by increasing denominator and then numerator. Position `n` of the
//! schedule holds the `(b+1)`-th occurrence of base entry `a+1`, where
//! `n - 1 = (a+b)(a+b+1)/2 + b` is the diagonal pairing.

use num_integer::Integer;
use num_rational::Ratio;

use crate::error::{Error, Result};

pub type Rational = Ratio<u64>;

/// Parses `p/s` or an integer into a rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Invalid(format!("r: expected a rational like 3/2, got {s:?}"));
    let (p, q) = match s.trim().split_once('/') {
        Some((p, q)) => (p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?),
        None => (s.trim().parse().map_err(|_| bad())?, 1),
    };
    if q == 0 {
        return Err(bad());
    }
    Ok(Rational::new(p, q))
}

fn totient(s: u64) -> u64 {
    (1..=s).filter(|p| p.gcd(&s) == 1).count() as u64
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RationalEnum;

impl RationalEnum {
    /// Base entry `r_i`, `i >= 1`.
    pub fn base(&self, i: u64) -> Rational {
        assert!(i >= 1, "base enumeration starts at 1");
        match i {
            1 => return Rational::from_integer(1),
            2 => return Rational::from_integer(2),
            _ => {}
        }
        // Denominator s >= 2 contributes φ(s) entries p/s with s < p < 2s.
        let mut rank = i - 2;
        let mut s = 2;
        loop {
            let count = totient(s);
            if rank <= count {
                let p = (s + 1..2 * s)
                    .filter(|p| p.gcd(&s) == 1)
                    .nth(rank as usize - 1)
                    .expect("rank within the totient count");
                return Rational::new(p, s);
            }
            rank -= count;
            s += 1;
        }
    }

    /// Inverse of [`base`](Self::base).
    pub fn base_index(&self, r: &Rational) -> Result<u64> {
        let one = Rational::from_integer(1);
        let two = Rational::from_integer(2);
        if *r < one || *r > two {
            return Err(Error::Invalid(format!("{r} is outside [1, 2]")));
        }
        if *r == one {
            return Ok(1);
        }
        if *r == two {
            return Ok(2);
        }
        let (p, s) = (*r.numer(), *r.denom());
        let before: u64 = (2..s).map(totient).sum();
        let rank = (s + 1..=p).filter(|x| x.gcd(&s) == 1).count() as u64;
        Ok(2 + before + rank)
    }

    /// `ω_n`, `n >= 1`.
    pub fn omega(&self, n: u64) -> Rational {
        let (a, _) = unpair(n - 1);
        self.base(a + 1)
    }

    /// The index `n` of the `m`-th occurrence (`m >= 1`) of `r` in the schedule.
    pub fn index_of(&self, r: &Rational, m: u64) -> Result<u64> {
        if m == 0 {
            return Err(Error::Invalid("occurrence: must be >= 1".into()));
        }
        let a = self.base_index(r)? - 1;
        let b = m - 1;
        Ok(pair(a, b) + 1)
    }
}

fn pair(a: u64, b: u64) -> u64 {
    (a + b) * (a + b + 1) / 2 + b
}

fn unpair(z: u64) -> (u64, u64) {
    let mut w = ((((8 * z + 1) as f64).sqrt() - 1.0) / 2.0) as u64;
    // Correct the floating-point estimate of the diagonal.
    while w * (w + 1) / 2 > z {
        w -= 1;
    }
    while (w + 1) * (w + 2) / 2 <= z {
        w += 1;
    }
    let b = z - w * (w + 1) / 2;
    (w - b, b)
}
