//! Exact rational scalars and first-order dual numbers.
//!
//! Every computation in this crate runs over `Rat`, an arbitrary-precision
//! rational kept in reduced canonical form, so equality is syntactic and
//! every reported invariant is exact. `Dual` models values of the form
//! `a + b*Z` with `Z^2 = 0` and carries first-order derivative data.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

/// An exact rational number in reduced canonical form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_u64(n: u64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    /// Builds `num/den`. Panics when `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Rat(BigRational::new(num, den))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// The integer value, when the reduced denominator is one.
    pub fn to_integer(&self) -> Option<BigInt> {
        if self.is_integer() {
            Some(self.0.to_integer())
        } else {
            None
        }
    }

    pub fn to_i64(&self) -> Option<i64> {
        self.to_integer().and_then(|n| i64::try_from(n).ok())
    }

    pub fn abs(&self) -> Self {
        Rat(self.0.abs())
    }

    /// Multiplicative inverse; `None` on zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Rat(self.0.recip()))
        }
    }

    /// `p^k` for a signed exponent.
    pub fn pow_of(p: u64, k: i64) -> Self {
        let base = BigInt::from(p);
        if k >= 0 {
            Rat(BigRational::from_integer(base.pow(k as u32)))
        } else {
            Rat(BigRational::new(BigInt::one(), base.pow((-k) as u32)))
        }
    }

    /// The p-adic valuation `v_p(self)`; undefined (None) on zero.
    pub fn valuation(&self, p: u64) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let p = BigInt::from(p);
        Some(int_valuation(self.numer(), &p) - int_valuation(self.denom(), &p))
    }
}

fn int_valuation(n: &BigInt, p: &BigInt) -> i64 {
    let mut n = n.abs();
    let mut v = 0i64;
    while !n.is_zero() && (&n % p).is_zero() {
        n /= p;
        v += 1;
    }
    v
}

macro_rules! rat_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                Rat(self.0 $op rhs.0)
            }
        }
        impl<'a> $tr<&'a Rat> for &'a Rat {
            type Output = Rat;
            fn $m(self, rhs: &'a Rat) -> Rat {
                Rat(&self.0 $op &rhs.0)
            }
        }
        impl<'a> $tr<&'a Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: &'a Rat) -> Rat {
                Rat(self.0 $op &rhs.0)
            }
        }
    };
}

rat_binop!(Add, add, +);
rat_binop!(Sub, sub, -);
rat_binop!(Mul, mul, *);

impl Div for Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero");
        Rat(self.0 / rhs.0)
    }
}

impl<'a> Div<&'a Rat> for &'a Rat {
    type Output = Rat;
    fn div(self, rhs: &'a Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero");
        Rat(&self.0 / &rhs.0)
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl AddAssign for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Rat {
    fn sub_assign(&mut self, rhs: Rat) {
        self.0 -= rhs.0;
    }
}

impl MulAssign for Rat {
    fn mul_assign(&mut self, rhs: Rat) {
        self.0 *= rhs.0;
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Parse failure for the rational literal grammar.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRatError(pub String);

impl FromStr for Rat {
    type Err = ParseRatError;

    /// Grammar: optional sign, decimal integer, optional `/` followed by a
    /// positive decimal integer. No whitespace.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseRatError(s.to_string());
        let (num_str, den_str) = match s.split_once('/') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let rest = num_str
            .strip_prefix('-')
            .or_else(|| num_str.strip_prefix('+'))
            .unwrap_or(num_str);
        if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let num: BigInt = num_str.parse().map_err(|_| bad())?;
        let den: BigInt = match den_str {
            None => BigInt::one(),
            Some(d) => {
                if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(bad());
                }
                let den: BigInt = d.parse().map_err(|_| bad())?;
                if den.is_zero() {
                    return Err(bad());
                }
                den
            }
        };
        Ok(Rat(BigRational::new(num, den)))
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A dual number `a + b*Z` with `Z^2 = 0`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Dual {
    /// Value at the closed point.
    pub unit: Rat,
    /// Coefficient of the infinitesimal `Z`.
    pub eps: Rat,
}

impl Dual {
    pub fn new(unit: Rat, eps: Rat) -> Self {
        Dual { unit, eps }
    }

    pub fn constant(unit: Rat) -> Self {
        Dual {
            unit,
            eps: Rat::zero(),
        }
    }

    /// Inverse exists iff the unit part is nonzero:
    /// `(a + bZ)^-1 = a^-1 - b a^-2 Z`.
    pub fn inv(&self) -> Option<Dual> {
        let u = self.unit.inv()?;
        let eps = -&(&(&self.eps * &u) * &u);
        Some(Dual { unit: u, eps })
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual {
            unit: self.unit + rhs.unit,
            eps: self.eps + rhs.eps,
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual {
            unit: self.unit - rhs.unit,
            eps: self.eps - rhs.eps,
        }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        // (a + bZ)(a' + b'Z) = aa' + (ab' + a'b)Z
        let eps = &self.unit * &rhs.eps + &self.eps * &rhs.unit;
        Dual {
            unit: self.unit * rhs.unit,
            eps,
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual {
            unit: -self.unit,
            eps: -self.eps,
        }
    }
}

impl Div for Dual {
    type Output = Dual;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Dual) -> Dual {
        let inv = rhs
            .inv()
            .expect("division by dual number with zero unit part");
        self * inv
    }
}

impl fmt::Display for Dual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}Z", self.unit, self.eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    #[test]
    fn parse_and_display_roundtrip() {
        for s in ["0", "7", "-3", "5/9", "-12/35", "+4"] {
            let v: Rat = s.parse().unwrap();
            let back: Rat = v.to_string().parse().unwrap();
            assert_eq!(v, back);
        }
        assert_eq!("+4".parse::<Rat>().unwrap(), Rat::from_int(4));
    }

    #[test]
    fn parse_rejects_bad_literals() {
        for s in [
            "", "1/0", "1/-2", "a", "1.5", " 1", "1 ", "3/ 4", "--2", "1//2", "2/",
        ] {
            assert!(s.parse::<Rat>().is_err(), "accepted {:?}", s);
        }
    }

    #[test]
    fn canonical_reduction() {
        assert_eq!(r(2, 4), r(1, 2));
        assert_eq!(r(-3, -6), r(1, 2));
        assert_eq!(r(3, -6), r(-1, 2));
        assert_eq!(r(2, 4).to_string(), "1/2");
    }

    #[test]
    fn valuation_basics() {
        assert_eq!(r(1, 2).valuation(2), Some(-1));
        assert_eq!(r(12, 5).valuation(2), Some(2));
        assert_eq!(r(9, 4).valuation(3), Some(2));
        assert_eq!(Rat::zero().valuation(2), None);
        assert_eq!(Rat::pow_of(2, -3), r(1, 8));
    }

    #[test]
    fn dual_inverse_of_one_plus_eps() {
        let x = Dual::new(Rat::one(), r(7, 3));
        let inv = x.clone().inv().unwrap();
        assert_eq!(inv, Dual::new(Rat::one(), r(-7, 3)));
        let prod = x * inv;
        assert_eq!(prod, Dual::constant(Rat::one()));
    }

    #[test]
    fn dual_zero_unit_has_no_inverse() {
        assert!(Dual::new(Rat::zero(), Rat::one()).inv().is_none());
    }
}
