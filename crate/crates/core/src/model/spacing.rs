use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Commensurate lattice spacing `kd = nπ/p`, stored in lowest terms.
///
/// Only the parity of the reduced `n` enters the superspin sign pattern, so
/// reduction never changes the physics: `2π/6` and `π/3` are the same spacing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Spacing {
    n: u32,
    p: u32,
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Spacing {
    pub fn new(n: u32, p: u32) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::Precondition(format!(
                "spacing n/p = {n}/{p} needs n >= 1 and p >= 1"
            )));
        }
        let g = gcd(n, p);
        Ok(Self { n: n / g, p: p / g })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of superspins.
    pub fn p(&self) -> u32 {
        self.p
    }

    /// `kd` in radians.
    pub fn kd(&self) -> f64 {
        self.n as f64 * PI / self.p as f64
    }

    /// `(-1)^{l n}` for the `l`-th member of a superspin.
    pub fn sign(&self, l: usize) -> f64 {
        if self.n % 2 == 1 && l % 2 == 1 {
            -1.0
        } else {
            1.0
        }
    }
}

impl fmt::Display for Spacing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.n, self.p)
    }
}

impl FromStr for Spacing {
    type Err = Error;

    /// Parses `"n/p"` (a rational multiple of π); a bare `"n"` means `p = 1`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Precondition(format!(
                "spacing {s:?} is not of the form \"n/p\" with positive integers"
            ))
        };
        let (n, p) = match s.trim().split_once('/') {
            Some((n, p)) => (n.trim(), p.trim()),
            None => (s.trim(), "1"),
        };
        let n: u32 = n.parse().map_err(|_| bad())?;
        let p: u32 = p.parse().map_err(|_| bad())?;
        Self::new(n, p)
    }
}

impl TryFrom<String> for Spacing {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Spacing> for String {
    fn from(s: Spacing) -> String {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_to_lowest_terms() {
        let s = Spacing::new(4, 6).unwrap();
        assert_eq!((s.n(), s.p()), (2, 3));
        let s = Spacing::new(2, 2).unwrap();
        assert_eq!((s.n(), s.p()), (1, 1));
        assert_eq!(s.sign(1), -1.0);
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(
            "2/3".parse::<Spacing>().unwrap(),
            Spacing::new(2, 3).unwrap()
        );
        assert_eq!(
            " 1 ".parse::<Spacing>().unwrap(),
            Spacing::new(1, 1).unwrap()
        );
        assert!("0/3".parse::<Spacing>().is_err());
        assert!("0.5".parse::<Spacing>().is_err());
        assert!((Spacing::new(2, 3).unwrap().kd() - 2.0 * PI / 3.0).abs() < 1e-15);
    }
}
