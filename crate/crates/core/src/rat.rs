//! Exact coefficient arithmetic: arbitrary-precision rationals and the
//! circle group Q/Z in "cycle units" (a stored value `x` stands for the
//! phase `exp(2*pi*i*x)`).

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;

pub type Int = BigInt;
pub type Rat = BigRational;

/// The three coefficient systems carried by cochains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoefficientRing {
    Integers,
    Rationals,
    RationalsMod1,
}

impl fmt::Display for CoefficientRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientRing::Integers => write!(f, "Z"),
            CoefficientRing::Rationals => write!(f, "Q"),
            CoefficientRing::RationalsMod1 => write!(f, "Q/Z"),
        }
    }
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Canonical representative of a rational modulo 1, in `[0, 1)`.
pub fn reduce_mod1(x: &Rat) -> Rat {
    x - x.floor()
}

/// True if `x` is an integer.
pub fn is_integral(x: &Rat) -> bool {
    x.denom().is_one()
}

/// Renders a rational as `p/q` (or `p` when the denominator is 1).
pub fn format_rat(x: &Rat) -> String {
    if is_integral(x) {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `p/q` or `p` into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat, Error> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt, Error> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::Parse(format!("invalid rational `{s}`")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let denom = parse_int(d)?;
            if denom.is_zero() {
                return Err(Error::Parse(format!("zero denominator in `{s}`")));
            }
            Ok(Rat::new(parse_int(n)?, denom))
        }
        None => Ok(Rat::from_integer(parse_int(s)?)),
    }
}

/// An element of Q/Z stored by its canonical representative in `[0, 1)`.
///
/// Equality is equality of representatives; `lift` recovers the
/// representative when a rational is needed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mod1(Rat);

impl Mod1 {
    pub fn new(x: Rat) -> Self {
        Mod1(reduce_mod1(&x))
    }

    pub fn zero() -> Self {
        Mod1(Rat::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn lift(&self) -> &Rat {
        &self.0
    }

    pub fn into_lift(self) -> Rat {
        self.0
    }
}

impl fmt::Display for Mod1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_rat(&self.0))
    }
}

impl From<Rat> for Mod1 {
    fn from(x: Rat) -> Self {
        Mod1::new(x)
    }
}

impl Add for Mod1 {
    type Output = Mod1;
    fn add(self, rhs: Mod1) -> Mod1 {
        Mod1::new(self.0 + rhs.0)
    }
}

impl Sub for Mod1 {
    type Output = Mod1;
    fn sub(self, rhs: Mod1) -> Mod1 {
        Mod1::new(self.0 - rhs.0)
    }
}

impl Neg for Mod1 {
    type Output = Mod1;
    fn neg(self) -> Mod1 {
        Mod1::new(-self.0)
    }
}

/// Scales a rational by an integer n (chain coefficients are integers).
pub fn scale_int(x: &Rat, n: &Int) -> Rat {
    x * Rat::from_integer(n.clone())
}

/// Sign of an integer as +1 / 0 / -1 in i64 form.
pub fn int_sign(x: &Int) -> i64 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mod1_reduces_to_unit_interval() {
        assert_eq!(Mod1::new(rat(7, 2)).lift(), &rat(1, 2));
        assert_eq!(Mod1::new(rat(-1, 3)).lift(), &rat(2, 3));
        assert_eq!(Mod1::new(rat_int(5)).lift(), &Rat::zero());
    }

    #[test]
    fn mod1_group_laws() {
        let a = Mod1::new(rat(3, 4));
        let b = Mod1::new(rat(1, 2));
        assert_eq!((a.clone() + b.clone()).lift(), &rat(1, 4));
        assert_eq!((a.clone() - a.clone()).lift(), &Rat::zero());
        assert_eq!((-b).lift(), &rat(1, 2));
    }

    #[test]
    fn rational_round_trip() {
        for s in ["3/7", "-12/5", "0", "4", "-9"] {
            let x = parse_rat(s).unwrap();
            assert_eq!(parse_rat(&format_rat(&x)).unwrap(), x);
        }
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }
}
