//! Exact rational numbers for makespan values.
//!
//! Values are kept in lowest terms with a positive denominator. Comparison
//! never multiplies, so it cannot overflow regardless of magnitude.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExactRational {
    numer: i128,
    denom: i128,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

impl ExactRational {
    pub const ZERO: ExactRational = ExactRational { numer: 0, denom: 1 };

    pub fn new(numer: i128, denom: i128) -> Result<Self> {
        if denom == 0 {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        if numer == i128::MIN || denom == i128::MIN {
            return Err(Error::Overflow("rational normalization"));
        }
        let g = gcd(numer, denom).max(1);
        let (mut n, mut d) = (numer / g, denom / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        Ok(ExactRational { numer: n, denom: d })
    }

    pub fn from_integer(value: i128) -> Self {
        ExactRational {
            numer: value,
            denom: 1,
        }
    }

    pub fn numer(&self) -> i128 {
        self.numer
    }

    pub fn denom(&self) -> i128 {
        self.denom
    }

    pub fn is_negative(&self) -> bool {
        self.numer < 0
    }

    /// `floor(self)`.
    pub fn floor(&self) -> i128 {
        self.numer.div_euclid(self.denom)
    }

    /// `floor(factor * self)` without forming the product when it would
    /// overflow.
    pub fn floor_scaled(&self, factor: u64) -> Result<i128> {
        // factor * n / d = factor * (q + r/d) = factor*q + floor(factor*r/d)
        let q = self.numer.div_euclid(self.denom);
        let r = self.numer.rem_euclid(self.denom);
        let f = i128::from(factor);
        let whole = f.checked_mul(q).ok_or(Error::Overflow("scaled floor"))?;
        let frac = f.checked_mul(r).ok_or(Error::Overflow("scaled floor"))? / self.denom;
        whole
            .checked_add(frac)
            .ok_or(Error::Overflow("scaled floor"))
    }
}

/// Compares `a/b` with `c/d` for positive denominators using the
/// continued-fraction expansion.
fn cmp_fractions(mut a: i128, mut b: i128, mut c: i128, mut d: i128) -> Ordering {
    let mut flipped = false;
    loop {
        let qa = a.div_euclid(b);
        let qc = c.div_euclid(d);
        if qa != qc {
            let ord = qa.cmp(&qc);
            return if flipped { ord.reverse() } else { ord };
        }
        let ra = a.rem_euclid(b);
        let rc = c.rem_euclid(d);
        match (ra == 0, rc == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => {
                return if flipped {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
            (false, true) => {
                return if flipped {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            (false, false) => {}
        }
        // ra/b < rc/d  <=>  b/ra > d/rc
        (a, b, c, d) = (b, ra, d, rc);
        flipped = !flipped;
    }
}

impl Ord for ExactRational {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_fractions(self.numer, self.denom, other.numer, other.denom)
    }
}

impl PartialOrd for ExactRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer, self.denom)
    }
}

impl FromStr for ExactRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("malformed rational {s:?}"));
        match s.split_once('/') {
            Some((n, d)) => {
                let n: i128 = n.trim().parse().map_err(|_| bad())?;
                let d: i128 = d.trim().parse().map_err(|_| bad())?;
                ExactRational::new(n, d)
            }
            None => Ok(ExactRational::from_integer(
                s.trim().parse().map_err(|_| bad())?,
            )),
        }
    }
}
