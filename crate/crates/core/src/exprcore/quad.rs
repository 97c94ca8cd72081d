//! Elements of a real quadratic field `Q(√d)`.
//!
//! A `Quad` is `a + b·√d` with `d` a squarefree integer `> 1`, or a plain
//! rational when `b = 0` (then `d` is stored as 1). Values from two different
//! fields cannot be combined; the `try_*` operations report that, while the
//! operator impls panic on it.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::One;

use super::rat::{square_split, Rat};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Quad {
    a: Rat,
    b: Rat,
    d: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("values from Q(√{0}) and Q(√{1}) cannot be combined")]
pub struct FieldMismatch(pub BigInt, pub BigInt);

impl Quad {
    pub fn rat(a: Rat) -> Quad {
        Quad {
            a,
            b: Rat::zero(),
            d: BigInt::one(),
        }
    }

    pub fn zero() -> Quad {
        Quad::rat(Rat::zero())
    }

    pub fn one() -> Quad {
        Quad::rat(Rat::one())
    }

    /// `a + b·√d` for squarefree `d > 1`; collapses to a rational when `b = 0`.
    pub fn new(a: Rat, b: Rat, d: BigInt) -> Quad {
        if b.is_zero() || d.is_one() {
            let a = if d.is_one() { a + b } else { a };
            return Quad::rat(a);
        }
        Quad { a, b, d }
    }

    /// Exact square root of a non-negative rational.
    pub fn sqrt_rat(r: &Rat) -> Option<Quad> {
        if r.is_negative() {
            return None;
        }
        if let Some(s) = r.nth_root_exact(2) {
            return Some(Quad::rat(s));
        }
        // sqrt(p/q) = sqrt(p*q)/q
        let pq = r.numer() * r.denom();
        let (s, m) = square_split(&pq);
        Some(Quad::new(
            Rat::zero(),
            Rat::new(s, r.denom().clone()),
            m,
        ))
    }

    pub fn rational_part(&self) -> &Rat {
        &self.a
    }

    pub fn surd_part(&self) -> &Rat {
        &self.b
    }

    pub fn radicand(&self) -> &BigInt {
        &self.d
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        self.b.is_zero().then_some(&self.a)
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    fn field(&self, other: &Quad) -> Result<BigInt, FieldMismatch> {
        match (self.b.is_zero(), other.b.is_zero()) {
            (true, _) => Ok(other.d.clone()),
            (_, true) => Ok(self.d.clone()),
            _ if self.d == other.d => Ok(self.d.clone()),
            _ => Err(FieldMismatch(self.d.clone(), other.d.clone())),
        }
    }

    pub fn try_add(&self, other: &Quad) -> Result<Quad, FieldMismatch> {
        let d = self.field(other)?;
        Ok(Quad::new(&self.a + &other.a, &self.b + &other.b, d))
    }

    pub fn try_sub(&self, other: &Quad) -> Result<Quad, FieldMismatch> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &Quad) -> Result<Quad, FieldMismatch> {
        let d = self.field(other)?;
        let dr = Rat::from_int(d.clone());
        let a = &self.a * &other.a + &self.b * &other.b * &dr;
        let b = &self.a * &other.b + &self.b * &other.a;
        Ok(Quad::new(a, b, d))
    }

    pub fn try_div(&self, other: &Quad) -> Result<Quad, FieldMismatch> {
        self.field(other)?;
        self.try_mul(&other.recip())
    }

    /// Conjugate `a − b·√d`.
    pub fn conj(&self) -> Quad {
        Quad::new(self.a.clone(), -&self.b, self.d.clone())
    }

    /// Field norm `a² − d·b²`.
    pub fn norm(&self) -> Rat {
        &self.a * &self.a - &self.b * &self.b * Rat::from_int(self.d.clone())
    }

    /// Panics on zero.
    pub fn recip(&self) -> Quad {
        assert!(!self.is_zero(), "reciprocal of zero");
        let n = self.norm();
        let c = self.conj();
        Quad::new(&c.a / &n, &c.b / &n, c.d)
    }

    pub fn pow(&self, exp: i64) -> Quad {
        if exp < 0 {
            return self.recip().pow(-exp);
        }
        let mut result = Quad::one();
        let mut base = self.clone();
        let mut e = exp as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Sign of the real number `a + b·√d`, decided exactly.
    pub fn signum(&self) -> i32 {
        let sa = self.a.signum();
        let sb = self.b.signum();
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return if sa == 0 { sb } else { sa };
        }
        // opposite signs: compare a² with d·b²
        let lhs = &self.a * &self.a;
        let rhs = &self.b * &self.b * Rat::from_int(self.d.clone());
        match lhs.cmp(&rhs) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    /// Exact order on the real line; `None` across different fields.
    pub fn try_cmp(&self, other: &Quad) -> Option<Ordering> {
        let diff = self.try_sub(other).ok()?;
        Some(diff.signum().cmp(&0))
    }

    /// Total order on real values; values from different fields are never
    /// equal, so refining enclosures always separates them.
    pub fn total_cmp(&self, other: &Quad) -> Ordering {
        if let Some(o) = self.try_cmp(other) {
            return o;
        }
        let mut bits = 16;
        loop {
            let (alo, ahi) = self.enclose(bits);
            let (blo, bhi) = other.enclose(bits);
            if ahi < blo {
                return Ordering::Less;
            }
            if bhi < alo {
                return Ordering::Greater;
            }
            bits *= 2;
        }
    }

    /// A rational enclosure `[lo, hi]` of the real value, of width `<= 2^-bits`.
    pub fn enclose(&self, bits: u32) -> (Rat, Rat) {
        if self.b.is_zero() {
            return (self.a.clone(), self.a.clone());
        }
        let (slo, shi) = sqrt_enclosure(&self.d, bits + self.b.abs().numer().bits() as u32 + 2);
        let (x, y) = if self.b.is_positive() {
            (&self.b * &slo, &self.b * &shi)
        } else {
            (&self.b * &shi, &self.b * &slo)
        };
        (&self.a + &x, &self.a + &y)
    }
}

/// Enclosure of `√d` for a positive integer `d` by integer square roots.
fn sqrt_enclosure(d: &BigInt, bits: u32) -> (Rat, Rat) {
    let scale = BigInt::one() << (2 * bits);
    let r = (d * &scale).sqrt();
    let den = BigInt::one() << bits;
    (Rat::new(r.clone(), den.clone()), Rat::new(r + 1, den))
}

impl From<Rat> for Quad {
    fn from(r: Rat) -> Quad {
        Quad::rat(r)
    }
}

impl From<i64> for Quad {
    fn from(n: i64) -> Quad {
        Quad::rat(Rat::from(n))
    }
}

impl fmt::Display for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        if self.a.is_zero() {
            write!(f, "{}*{}^(1/2)", self.b, self.d)
        } else {
            write!(f, "{} + {}*{}^(1/2)", self.a, self.b, self.d)
        }
    }
}

impl fmt::Debug for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Neg for &Quad {
    type Output = Quad;
    fn neg(self) -> Quad {
        Quad::new(-&self.a, -&self.b, self.d.clone())
    }
}

impl Neg for Quad {
    type Output = Quad;
    fn neg(self) -> Quad {
        -&self
    }
}

macro_rules! quad_op {
    ($tr:ident, $m:ident, $try:ident) => {
        impl<'a, 'b> $tr<&'b Quad> for &'a Quad {
            type Output = Quad;
            fn $m(self, rhs: &'b Quad) -> Quad {
                self.$try(rhs).expect("quadratic field mismatch")
            }
        }
        impl $tr<Quad> for Quad {
            type Output = Quad;
            fn $m(self, rhs: Quad) -> Quad {
                (&self).$try(&rhs).expect("quadratic field mismatch")
            }
        }
    };
}

quad_op!(Add, add, try_add);
quad_op!(Sub, sub, try_sub);
quad_op!(Mul, mul, try_mul);
quad_op!(Div, div, try_div);
