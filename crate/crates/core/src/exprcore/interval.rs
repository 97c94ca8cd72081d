//! Rational interval enclosures with outward rounding.
//!
//! Used wherever a value involves transcendental parts that do not cancel
//! exactly (e.g. `log(n)` at a non-power). Every operation returns an
//! interval guaranteed to contain the true value; endpoints are rounded
//! outward to dyadic rationals to keep their size bounded.

use super::eval::{eval_exact, Bindings, EvalError};
use super::expr::{Expr, Func};
use super::rat::Rat;

/// Default working precision in bits.
pub const DEFAULT_BITS: u32 = 96;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rat,
    pub hi: Rat,
}

impl Interval {
    pub fn point(r: Rat) -> Interval {
        Interval { lo: r.clone(), hi: r }
    }

    pub fn new(lo: Rat, hi: Rat) -> Interval {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn contains(&self, r: &Rat) -> bool {
        &self.lo <= r && r <= &self.hi
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    fn round(self, bits: u32) -> Interval {
        Interval { lo: self.lo.round_down(bits), hi: self.hi.round_up(bits) }
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -&self.hi, hi: -&self.lo }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval { lo, hi }
    }

    pub fn recip(&self) -> Result<Interval, EvalError> {
        if self.contains(&Rat::zero()) {
            return Err(EvalError::DivisionByZero);
        }
        Ok(Interval { lo: self.hi.recip(), hi: self.lo.recip() })
    }

    pub fn powi(&self, k: i64) -> Result<Interval, EvalError> {
        if k < 0 {
            return self.powi(-k)?.recip();
        }
        if k == 0 {
            return Ok(Interval::point(Rat::one()));
        }
        let (a, b) = (self.lo.pow(k), self.hi.pow(k));
        Ok(if k % 2 == 1 || self.lo >= Rat::zero() {
            Interval { lo: Rat::min(a.clone(), b.clone()), hi: Rat::max(a, b) }
        } else if self.hi <= Rat::zero() {
            Interval { lo: b, hi: a }
        } else {
            Interval { lo: Rat::zero(), hi: Rat::max(a, b) }
        })
    }

    pub fn log(&self, bits: u32) -> Result<Interval, EvalError> {
        if self.lo <= Rat::zero() {
            return Err(EvalError::DomainError(format!("log of interval [{}, {}]", self.lo, self.hi)));
        }
        Ok(Interval { lo: log_enclosure(&self.lo, bits).lo, hi: log_enclosure(&self.hi, bits).hi })
    }

    pub fn exp(&self, bits: u32) -> Interval {
        Interval { lo: exp_enclosure(&self.lo, bits).lo, hi: exp_enclosure(&self.hi, bits).hi }
    }
}

/// Enclosure of `2·atanh(z)` for `0 <= z <= 1/3`.
fn two_atanh(z: &Rat, bits: u32) -> Interval {
    let terms = bits / 3 + 2;
    let z2 = z * z;
    let mut pw = z.clone();
    let mut sum = Rat::zero();
    for i in 0..terms {
        sum += &(&pw / &Rat::from(2 * i as i64 + 1));
        pw = &pw * &z2;
    }
    // tail ≤ z^(2N+1) / ((2N+1)(1 - z²))
    let tail = &pw / &(Rat::from(2 * terms as i64 + 1) * (Rat::one() - z2));
    let two = Rat::from(2);
    Interval { lo: &sum * &two, hi: (sum + tail) * two }
}

/// Enclosure of the natural logarithm of a positive rational.
pub fn log_enclosure(r: &Rat, bits: u32) -> Interval {
    assert!(r.is_positive(), "log of non-positive value");
    if r.is_one() {
        return Interval::point(Rat::zero());
    }
    let two = Rat::from(2);
    let mut k = r.numer().bits() as i64 - r.denom().bits() as i64;
    let mut m = r / &two.pow(k);
    while m >= two {
        m = m / &two;
        k += 1;
    }
    while m < Rat::one() {
        m = m * &two;
        k -= 1;
    }
    let work = bits + 8 + (64 - k.unsigned_abs().leading_zeros());
    let z = (&m - &Rat::one()) / (&m + &Rat::one());
    let log_m = two_atanh(&z, work);
    let log2 = two_atanh(&Rat::new(1, 3), work);
    log2.mul(&Interval::point(Rat::from(k))).add(&log_m).round(bits)
}

/// Enclosure of `e^x` for a rational `x`.
pub fn exp_enclosure(x: &Rat, bits: u32) -> Interval {
    if x.is_zero() {
        return Interval::point(Rat::one());
    }
    // halve until |y| <= 1/2
    let mut s: u32 = 0;
    let half = Rat::new(1, 2);
    let mut y = x.clone();
    while y.abs() > half {
        y = y * &half;
        s += 1;
    }
    let work = bits + 8 + 2 * s;
    let terms = work / 2 + 4;
    let mut t = Rat::one();
    let mut sum = Rat::zero();
    for i in 0..terms {
        sum += &t;
        t = t * &y / Rat::from(i as i64 + 1);
    }
    // |remainder| ≤ 2·|y|^N/N!
    let err = t.abs() * Rat::from(2);
    let mut iv = Interval { lo: &sum - &err, hi: &sum + &err }.round(work);
    for _ in 0..s {
        iv = Interval { lo: &iv.lo * &iv.lo, hi: &iv.hi * &iv.hi }.round(work);
    }
    iv.round(bits)
}

/// Interval value of an expression under exact bindings.
pub fn eval_interval(e: &Expr, b: &Bindings, bits: u32) -> Result<Interval, EvalError> {
    if let Ok(v) = eval_exact(e, b) {
        return Ok(Interval::point(v));
    }
    match e {
        Expr::Const(r) => Ok(Interval::point(r.clone())),
        Expr::Sym(s) => b.get(s).cloned().map(Interval::point).ok_or_else(|| EvalError::UnboundSymbol(s.clone())),
        Expr::Add(ts) => {
            let mut acc = Interval::point(Rat::zero());
            for t in ts {
                acc = acc.add(&eval_interval(t, b, bits)?);
            }
            Ok(acc.round(bits))
        }
        Expr::Mul(fs) => {
            let mut acc = Interval::point(Rat::one());
            for f in fs {
                acc = acc.mul(&eval_interval(f, b, bits)?).round(bits);
            }
            Ok(acc)
        }
        Expr::Pow(base, x) => {
            if let Some(k) = x.as_rat().and_then(|k| k.to_i64()) {
                return Ok(eval_interval(base, b, bits)?.powi(k)?.round(bits));
            }
            let bv = eval_interval(base, b, bits)?;
            let xv = eval_interval(x, b, bits)?;
            Ok(xv.mul(&bv.log(bits)?).round(bits).exp(bits))
        }
        Expr::Func(Func::Log, args) => eval_interval(&args[0], b, bits)?.log(bits),
        _ => eval_exact(e, b).map(Interval::point),
    }
}
