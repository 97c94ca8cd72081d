//! Arbitrary-precision rationals.
//!
//! `Rat` is a thin newtype over `num_rational::BigRational`. The denominator
//! is always positive and the fraction is always reduced, so structural
//! equality is value equality and rendering is canonical.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Rat {
        Rat(BigRational::new(num.into(), den.into()))
    }

    pub fn from_int(n: impl Into<BigInt>) -> Rat {
        Rat(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Rat {
        Rat(BigRational::zero())
    }

    pub fn one() -> Rat {
        Rat(BigRational::one())
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

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn signum(&self) -> i32 {
        match self.0.numer().sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    pub fn recip(&self) -> Rat {
        Rat(self.0.recip())
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// The integer value, if this rational is an integer.
    pub fn to_bigint(&self) -> Option<BigInt> {
        self.is_integer().then(|| self.0.to_integer())
    }

    pub fn to_i64(&self) -> Option<i64> {
        self.to_bigint().and_then(|n| n.to_i64())
    }

    /// Integer power; negative exponents invert. Panics on `0^-k`.
    pub fn pow(&self, exp: i64) -> Rat {
        if exp < 0 {
            assert!(!self.is_zero(), "zero raised to a negative power");
            return Rat(self.0.recip()).pow(-exp);
        }
        let e = u32::try_from(exp).expect("exponent too large");
        Rat(num_traits::pow(self.0.clone(), e as usize))
    }

    /// Exact `q`-th root when it is rational.
    pub fn nth_root_exact(&self, q: u32) -> Option<Rat> {
        if q == 0 {
            return None;
        }
        if q == 1 {
            return Some(self.clone());
        }
        if self.is_negative() {
            if q % 2 == 0 {
                return None;
            }
            return self.neg().nth_root_exact(q).map(|r| -r);
        }
        let n = int_root_exact(self.numer(), q)?;
        let d = int_root_exact(self.denom(), q)?;
        Some(Rat::new(n, d))
    }

    /// `Some(k)` when `self == base^k` for an integer `k`.
    pub fn log_exact(&self, base: &Rat) -> Option<i64> {
        if self.is_one() {
            return Some(0);
        }
        if base.is_zero() || base.abs().is_one() || self.is_zero() {
            return None;
        }
        let (step, flip_base) = if base.abs() > Rat::one() {
            (base.clone(), 1)
        } else {
            (base.recip(), -1)
        };
        let (target, flip_target) = if self.abs() > Rat::one() {
            (self.clone(), 1)
        } else {
            (self.recip(), -1)
        };
        let mut acc = Rat::one();
        let mut k = 0i64;
        while acc.abs() < target.abs() {
            acc = &acc * &step;
            k += 1;
        }
        (acc == target).then_some(k * flip_base * flip_target)
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    pub fn max(a: Rat, b: Rat) -> Rat {
        if a >= b {
            a
        } else {
            b
        }
    }

    pub fn min(a: Rat, b: Rat) -> Rat {
        if a <= b {
            a
        } else {
            b
        }
    }

    /// Largest rational with denominator `2^bits` that is `<= self`.
    pub fn round_down(&self, bits: u32) -> Rat {
        let scale = BigInt::one() << bits;
        let scaled = Rat(&self.0 * BigRational::from_integer(scale.clone()));
        Rat::new(scaled.floor(), scale)
    }

    /// Smallest rational with denominator `2^bits` that is `>= self`.
    pub fn round_up(&self, bits: u32) -> Rat {
        let scale = BigInt::one() << bits;
        let scaled = Rat(&self.0 * BigRational::from_integer(scale.clone()));
        Rat::new(scaled.ceil(), scale)
    }
}

fn int_root_exact(n: &BigInt, q: u32) -> Option<BigInt> {
    if n.is_zero() {
        return Some(BigInt::zero());
    }
    let r = n.nth_root(q);
    (num_traits::pow(r.clone(), q as usize) == *n).then_some(r)
}

/// Splits a positive integer into `(s, m)` with `n = s^2 * m` and `m`
/// squarefree, using trial division.
pub fn square_split(n: &BigInt) -> (BigInt, BigInt) {
    let mut rest = n.clone();
    let mut s = BigInt::one();
    let mut m = BigInt::one();
    let mut p = BigInt::from(2);
    while &p * &p <= rest {
        let mut e = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            e += 1;
        }
        for _ in 0..e / 2 {
            s *= &p;
        }
        if e % 2 == 1 {
            m *= &p;
        }
        p += if p == BigInt::from(2) { 1 } else { 2 };
        if p.bits() > 24 {
            break;
        }
    }
    let r = rest.sqrt();
    if &r * &r == rest {
        s *= r;
    } else {
        m *= rest;
    }
    (s, m)
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
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = String;

    fn from_str(s: &str) -> Result<Rat, String> {
        let s = s.trim();
        let parse = |t: &str| {
            BigInt::from_str(t.trim()).map_err(|_| format!("invalid rational `{s}`"))
        };
        match s.split_once('/') {
            Some((n, d)) => {
                let d = parse(d)?;
                if d.is_zero() {
                    return Err(format!("zero denominator in `{s}`"));
                }
                Ok(Rat::new(parse(n)?, d))
            }
            None => Ok(Rat::from_int(parse(s)?)),
        }
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Rat {
        Rat::from_int(n)
    }
}

impl From<i32> for Rat {
    fn from(n: i32) -> Rat {
        Rat::from_int(n)
    }
}

impl From<BigInt> for Rat {
    fn from(n: BigInt) -> Rat {
        Rat::from_int(n)
    }
}

impl PartialEq<i64> for Rat {
    fn eq(&self, other: &i64) -> bool {
        self.is_integer() && self.0.numer() == &BigInt::from(*other)
    }
}

impl PartialOrd<i64> for Rat {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        self.partial_cmp(&Rat::from(*other))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                Rat(self.0.$m(rhs.0))
            }
        }
        impl<'a> $tr<&'a Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: &'a Rat) -> Rat {
                Rat(self.0.$m(&rhs.0))
            }
        }
        impl<'a> $tr<Rat> for &'a Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                Rat((&self.0).$m(rhs.0))
            }
        }
        impl<'a, 'b> $tr<&'b Rat> for &'a Rat {
            type Output = Rat;
            fn $m(self, rhs: &'b Rat) -> Rat {
                Rat((&self.0).$m(&rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0.clone())
    }
}

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rat> for Rat {
    fn mul_assign(&mut self, rhs: &Rat) {
        self.0 *= &rhs.0;
    }
}

impl std::iter::Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |a, b| a + b)
    }
}

impl std::iter::Product for Rat {
    fn product<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::one(), |a, b| a * b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_and_signed() {
        let r = Rat::new(6, -4);
        assert_eq!(r.to_string(), "-3/2");
        assert_eq!(r.denom(), &BigInt::from(2));
    }

    #[test]
    fn roots_and_logs() {
        assert_eq!(Rat::new(9, 4).nth_root_exact(2), Some(Rat::new(3, 2)));
        assert_eq!(Rat::from(2).nth_root_exact(2), None);
        assert_eq!(Rat::from(-27).nth_root_exact(3), Some(Rat::from(-3)));
        assert_eq!(Rat::from(8).log_exact(&Rat::from(2)), Some(3));
        assert_eq!(Rat::new(1, 8).log_exact(&Rat::from(2)), Some(-3));
        assert_eq!(Rat::from(6).log_exact(&Rat::from(2)), None);
        assert_eq!(Rat::from(-8).log_exact(&Rat::from(-2)), Some(3));
    }

    #[test]
    fn square_split_small() {
        let (s, m) = square_split(&BigInt::from(72));
        assert_eq!((s, m), (BigInt::from(6), BigInt::from(2)));
        let (s, m) = square_split(&BigInt::from(5));
        assert_eq!((s, m), (BigInt::from(1), BigInt::from(5)));
    }

    #[test]
    fn outward_rounding() {
        let third = Rat::new(1, 3);
        assert!(third.round_down(10) <= third);
        assert!(third.round_up(10) >= third);
        assert!(third.round_up(10) - third.round_down(10) <= Rat::new(1, 1024));
    }
}
