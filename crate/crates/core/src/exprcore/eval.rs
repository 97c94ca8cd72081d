//! Exact evaluation of expression trees.
//!
//! Values live in `Q(√d)`, plus a restricted log domain: `log(r)` of a
//! positive rational is kept as a combination `Σ c_p·log p` over its prime
//! factors. Products and quotients of logs that are proportional cancel to
//! rationals, and `b^e` with a log-ratio exponent is computed as
//! `exp(e·log b)`. Thus `n^(log(7)/log(2))` at `n = 8` is exactly `343`,
//! while `log(3)` alone is reported as non-rational.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::expr::{Expr, Func};
use super::quad::{FieldMismatch, Quad};
use super::rat::Rat;

pub type Bindings = BTreeMap<String, Rat>;

const MAX_RESULT_BITS: u64 = 1 << 22;
const MAX_ITERATIONS: i64 = 1_000_000;
const TRIAL_DIVISION_LIMIT: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
    #[error("non-integer exponent on a negative base")]
    NonIntegerExponent,
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("value is not rational: {0}")]
    NonRational(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("no value available for `{0}`")]
    UnknownCall(String),
    #[error("value too large to evaluate exactly")]
    TooLarge,
    #[error(transparent)]
    Field(#[from] FieldMismatch),
}

/// Resolves references to recurrence unknowns during evaluation.
pub type Lookup<'a> = &'a mut dyn FnMut(&str, &[Rat]) -> Result<Rat, EvalError>;

/// `Σ c_a·log a` over (pseudo-)prime atoms `a`; never stores zero entries.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LogComb(BTreeMap<BigInt, Rat>);

impl LogComb {
    pub fn of(r: &Rat) -> Result<LogComb, EvalError> {
        if !r.is_positive() {
            return Err(EvalError::DomainError(format!("log of non-positive value {r}")));
        }
        let mut out = BTreeMap::new();
        for (p, e) in factor_int(r.numer()) {
            *out.entry(p).or_insert_with(Rat::zero) += &Rat::from(e as i64);
        }
        for (p, e) in factor_int(r.denom()) {
            *out.entry(p).or_insert_with(Rat::zero) -= &Rat::from(e as i64);
        }
        out.retain(|_, c| !c.is_zero());
        Ok(LogComb(out))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn add(&mut self, other: &LogComb) {
        for (p, c) in &other.0 {
            *self.0.entry(p.clone()).or_insert_with(Rat::zero) += c;
        }
        self.0.retain(|_, c| !c.is_zero());
    }

    fn scale(&self, k: &Rat) -> LogComb {
        if k.is_zero() {
            return LogComb::default();
        }
        LogComb(self.0.iter().map(|(p, c)| (p.clone(), c * k)).collect())
    }

    /// `self / other` when the two combinations are proportional.
    fn ratio(&self, other: &LogComb) -> Option<Rat> {
        if self.0.len() != other.0.len() || other.is_zero() {
            return None;
        }
        let mut ratio: Option<Rat> = None;
        for ((p, c), (q, d)) in self.0.iter().zip(other.0.iter()) {
            if p != q {
                return None;
            }
            let r = c / d;
            match &ratio {
                Some(prev) if *prev != r => return None,
                _ => ratio = Some(r),
            }
        }
        ratio
    }

    /// `exp` of the combination, when rational.
    fn exp(&self) -> Result<Rat, EvalError> {
        let mut acc = Rat::one();
        for (p, c) in &self.0 {
            let Some(k) = c.to_bigint() else {
                return Err(EvalError::NonRational("exponential of a non-integral log".into()));
            };
            let k = k.to_i64().ok_or(EvalError::TooLarge)?;
            if k.unsigned_abs().saturating_mul(p.bits()) > MAX_RESULT_BITS {
                return Err(EvalError::TooLarge);
            }
            acc *= &Rat::from_int(p.clone()).pow(k);
        }
        Ok(acc)
    }
}

/// Trial-division factorization; a leftover cofactor above the trial limit
/// is kept as a single atom.
pub fn factor_int(n: &BigInt) -> Vec<(BigInt, u32)> {
    let mut n = n.abs();
    let mut out = Vec::new();
    if n <= BigInt::one() {
        return out;
    }
    let mut p: u64 = 2;
    while p <= TRIAL_DIVISION_LIMIT {
        let bp = BigInt::from(p);
        if &bp * &bp > n {
            break;
        }
        let mut e = 0;
        while (&n % &bp).is_zero() {
            n /= &bp;
            e += 1;
        }
        if e > 0 {
            out.push((bp, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > BigInt::one() {
        out.push((n, 1));
    }
    out
}

#[derive(Clone, Debug)]
enum Value {
    Num(Quad),
    Log(LogComb),
}

fn check_size(base_bits: u64, exp: i64) -> Result<(), EvalError> {
    if exp.unsigned_abs().saturating_mul(base_bits.max(1)) > MAX_RESULT_BITS {
        Err(EvalError::TooLarge)
    } else {
        Ok(())
    }
}

fn quad_bits(q: &Quad) -> u64 {
    let a = q.rational_part();
    let b = q.surd_part();
    [a.numer().bits(), a.denom().bits(), b.numer().bits(), b.denom().bits(), q.radicand().bits()]
        .into_iter()
        .max()
        .unwrap_or(1)
}

struct Evaluator<'a, 'b> {
    bindings: Bindings,
    lookup: Option<Lookup<'b>>,
    _marker: std::marker::PhantomData<&'a ()>,
}

impl<'a, 'b> Evaluator<'a, 'b> {
    fn eval(&mut self, e: &Expr) -> Result<Value, EvalError> {
        match e {
            Expr::Const(r) => Ok(Value::Num(Quad::rat(r.clone()))),
            Expr::Sym(s) => self
                .bindings
                .get(s)
                .cloned()
                .map(|r| Value::Num(Quad::rat(r)))
                .ok_or_else(|| EvalError::UnboundSymbol(s.clone())),
            Expr::Add(ts) => {
                let mut num = Quad::zero();
                let mut log = LogComb::default();
                for t in ts {
                    match self.eval(t)? {
                        Value::Num(q) => num = num.try_add(&q)?,
                        Value::Log(l) => log.add(&l),
                    }
                }
                match (num.is_zero(), log.is_zero()) {
                    (_, true) => Ok(Value::Num(num)),
                    (true, false) => Ok(Value::Log(log)),
                    _ => Err(EvalError::NonRational("sum of a number and a logarithm".into())),
                }
            }
            Expr::Mul(fs) => self.eval_product(fs),
            Expr::Pow(b, x) => self.eval_pow(b, x),
            Expr::Func(f, args) => self.eval_func(*f, args),
            Expr::Unknown(name, args) => {
                let vals = args
                    .iter()
                    .map(|a| self.eval_rat(a))
                    .collect::<Result<Vec<_>, _>>()?;
                match self.lookup.as_mut() {
                    Some(l) => Ok(Value::Num(Quad::rat(l(name, &vals)?))),
                    None => Err(EvalError::UnknownCall(name.clone())),
                }
            }
        }
    }

    fn eval_rat(&mut self, e: &Expr) -> Result<Rat, EvalError> {
        match self.eval(e)? {
            Value::Num(q) => q
                .as_rat()
                .cloned()
                .ok_or_else(|| EvalError::NonRational(format!("{q}"))),
            Value::Log(_) => Err(EvalError::NonRational("logarithm".into())),
        }
    }

    fn eval_int(&mut self, e: &Expr) -> Result<i64, EvalError> {
        let r = self.eval_rat(e)?;
        r.to_i64()
            .ok_or_else(|| EvalError::DomainError(format!("expected an integer, got {r}")))
    }

    fn eval_product(&mut self, fs: &[Expr]) -> Result<Value, EvalError> {
        let mut num = Quad::one();
        let mut pos: Vec<LogComb> = Vec::new();
        let mut neg: Vec<LogComb> = Vec::new();
        let mut flat: Vec<&Expr> = Vec::new();
        let mut stack: Vec<&Expr> = fs.iter().rev().collect();
        while let Some(f) = stack.pop() {
            match f {
                Expr::Mul(inner) => stack.extend(inner.iter().rev()),
                _ => flat.push(f),
            }
        }
        for f in flat {
            // log factors raised to small integer powers are tracked separately
            if let Expr::Pow(b, x) = f {
                if let Some(k) = x.as_rat().and_then(|k| k.to_i64()) {
                    match self.eval(b)? {
                        Value::Log(l) => {
                            let list = if k > 0 { &mut pos } else { &mut neg };
                            for _ in 0..k.unsigned_abs() {
                                list.push(l.clone());
                            }
                        }
                        Value::Num(bq) => num = num.try_mul(&pow_num(&bq, &Rat::from(k))?)?,
                    }
                    continue;
                }
            }
            match self.eval(f)? {
                Value::Num(q) => num = num.try_mul(&q)?,
                Value::Log(l) => pos.push(l),
            }
        }
        if num.is_zero() {
            return Ok(Value::Num(Quad::zero()));
        }
        for d in neg {
            let Some(i) = pos.iter().position(|p| p.ratio(&d).is_some()) else {
                return Err(EvalError::NonRational("quotient of unrelated logarithms".into()));
            };
            let r = pos.remove(i).ratio(&d).unwrap();
            num = num.try_mul(&Quad::rat(r))?;
        }
        match pos.len() {
            0 => Ok(Value::Num(num)),
            1 => match num.as_rat() {
                Some(r) => Ok(Value::Log(pos[0].scale(r))),
                None => Err(EvalError::NonRational("irrational multiple of a logarithm".into())),
            },
            _ => Err(EvalError::NonRational("product of logarithms".into())),
        }
    }

    fn eval_pow(&mut self, b: &Expr, x: &Expr) -> Result<Value, EvalError> {
        match self.eval(x) {
            Ok(Value::Num(q)) => {
                let q = q
                    .as_rat()
                    .cloned()
                    .ok_or_else(|| EvalError::NonRational("irrational exponent".into()))?;
                let base = self.eval(b)?;
                match base {
                    Value::Log(l) => match q.to_i64() {
                        Some(0) => Ok(Value::Num(Quad::one())),
                        Some(1) => Ok(Value::Log(l)),
                        _ => Err(EvalError::NonRational("power of a logarithm".into())),
                    },
                    Value::Num(bq) => pow_num(&bq, &q).map(Value::Num),
                }
            }
            Err(EvalError::NonRational(_)) if matches!(x, Expr::Add(_)) => {
                // b^(x1 + x2) = b^x1 · b^x2
                let Expr::Add(ts) = x else { unreachable!() };
                let mut acc = Quad::one();
                for t in ts {
                    match self.eval_pow(b, t)? {
                        Value::Num(q) => acc = acc.try_mul(&q)?,
                        Value::Log(_) => return Err(EvalError::NonRational("power of a logarithm".into())),
                    }
                }
                Ok(Value::Num(acc))
            }
            Ok(Value::Log(_)) | Err(EvalError::NonRational(_)) => {
                // b^x = exp(x * log b)
                let base = self.eval_rat(b)?;
                if !base.is_positive() {
                    return Err(EvalError::DomainError(format!(
                        "irrational power of non-positive base {base}"
                    )));
                }
                let prod = Expr::Mul(vec![x.clone(), Expr::log(Expr::Const(base))]);
                match self.eval(&prod)? {
                    Value::Num(q) if q.is_zero() => Ok(Value::Num(Quad::one())),
                    Value::Log(l) => Ok(Value::Num(Quad::rat(l.exp()?))),
                    Value::Num(_) => Err(EvalError::NonRational("exponential of a rational".into())),
                }
            }
            Err(e) => Err(e),
        }
    }

    fn eval_func(&mut self, f: Func, args: &[Expr]) -> Result<Value, EvalError> {
        match f {
            Func::Log => {
                let v = self.eval_rat(&args[0])?;
                let l = LogComb::of(&v)?;
                Ok(if l.is_zero() { Value::Num(Quad::zero()) } else { Value::Log(l) })
            }
            Func::Factorial => {
                let k = self.eval_int(&args[0])?;
                if k < 0 {
                    return Err(EvalError::DomainError(format!("factorial of negative {k}")));
                }
                if k > 200_000 {
                    return Err(EvalError::TooLarge);
                }
                let mut acc = BigInt::one();
                for i in 2..=k {
                    acc *= i;
                }
                Ok(Value::Num(Quad::rat(Rat::from_int(acc))))
            }
            Func::Binomial => {
                let a = self.eval_rat(&args[0])?;
                let k = self.eval_int(&args[1])?;
                if k < 0 {
                    return Ok(Value::Num(Quad::zero()));
                }
                let mut acc = Rat::one();
                for i in 0..k {
                    acc = acc * (&a - &Rat::from(i)) / Rat::from(i + 1);
                }
                Ok(Value::Num(Quad::rat(acc)))
            }
            Func::Sum | Func::Prod => {
                let Expr::Sym(k) = &args[1] else {
                    return Err(EvalError::DomainError("summation index must be a symbol".into()));
                };
                let lo = self.eval_int(&args[2])?;
                let hi = self.eval_int(&args[3])?;
                if hi - lo > MAX_ITERATIONS {
                    return Err(EvalError::TooLarge);
                }
                let saved = self.bindings.get(k).cloned();
                let mut acc = if f == Func::Sum { Quad::zero() } else { Quad::one() };
                let mut result = Ok(());
                for i in lo..=hi {
                    self.bindings.insert(k.clone(), Rat::from(i));
                    match self.eval(&args[0]) {
                        Ok(Value::Num(q)) => {
                            acc = if f == Func::Sum { acc.try_add(&q)? } else { acc.try_mul(&q)? };
                        }
                        Ok(Value::Log(_)) => {
                            result = Err(EvalError::NonRational("logarithm inside sum".into()));
                            break;
                        }
                        Err(e) => {
                            result = Err(e);
                            break;
                        }
                    }
                }
                match saved {
                    Some(v) => self.bindings.insert(k.clone(), v),
                    None => self.bindings.remove(k),
                };
                result.map(|_| Value::Num(acc))
            }
        }
    }
}

fn pow_num(b: &Quad, q: &Rat) -> Result<Quad, EvalError> {
    if let Some(k) = q.to_i64() {
        if b.is_zero() {
            return if k > 0 {
                Ok(Quad::zero())
            } else if k == 0 {
                Ok(Quad::one())
            } else {
                Err(EvalError::DivisionByZero)
            };
        }
        check_size(quad_bits(b), k)?;
        return Ok(b.pow(k));
    }
    if !q.is_integer() && q.to_bigint().is_none() && q.numer().to_i64().is_none() {
        return Err(EvalError::TooLarge);
    }
    let Some(br) = b.as_rat() else {
        return Err(EvalError::NonRational("fractional power of a surd".into()));
    };
    if br.is_negative() {
        return Err(EvalError::NonIntegerExponent);
    }
    let p = q.numer().to_i64().ok_or(EvalError::TooLarge)?;
    let r = q.denom().to_u32().ok_or(EvalError::TooLarge)?;
    if let Some(root) = br.nth_root_exact(r) {
        check_size(root.numer().bits().max(root.denom().bits()), p)?;
        return Ok(Quad::rat(root.pow(p)));
    }
    if r == 2 {
        let s = Quad::sqrt_rat(br).expect("non-negative");
        check_size(quad_bits(&s), p)?;
        return Ok(s.pow(p));
    }
    Err(EvalError::NonRational(format!("{br}^({q})")))
}

/// Exact rational value of `e`.
pub fn eval_exact(e: &Expr, bindings: &Bindings) -> Result<Rat, EvalError> {
    eval_with(e, bindings, None)
}

/// Exact value, with `lookup` resolving unknown references such as `x(n - 1)`.
pub fn eval_with(e: &Expr, bindings: &Bindings, lookup: Option<Lookup<'_>>) -> Result<Rat, EvalError> {
    let mut ev = Evaluator { bindings: bindings.clone(), lookup, _marker: std::marker::PhantomData };
    ev.eval_rat(e)
}

/// Exact value in a quadratic field (surds allowed in the result).
pub fn eval_quad(e: &Expr, bindings: &Bindings) -> Result<Quad, EvalError> {
    let mut ev = Evaluator { bindings: bindings.clone(), lookup: None, _marker: std::marker::PhantomData };
    match ev.eval(e)? {
        Value::Num(q) => Ok(q),
        Value::Log(_) => Err(EvalError::NonRational("logarithm".into())),
    }
}

pub fn bindings<'s>(pairs: impl IntoIterator<Item = (&'s str, Rat)>) -> Bindings {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}
