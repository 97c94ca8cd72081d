//! Coefficients that may carry symbolic parameters.
//!
//! A `Coef` is a finite sum `Σ q_i·m_i` where each `q_i` is a `Quad` and each
//! `m_i` is a normalized, index-free monomial in symbolic atoms such as `x0`,
//! `a` or `log(3)`. The constant part is stored under the key `1`.

use std::collections::BTreeMap;
use std::fmt;

use super::eval::{eval_quad, Bindings, EvalError};
use super::expr::Expr;
use super::normalize::{norm_mul, norm_pow, normalize};
use super::quad::{FieldMismatch, Quad};
use super::rat::Rat;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Coef(BTreeMap<Expr, Quad>);

/// `a + b·√d` as an expression.
pub fn quad_to_expr(q: &Quad) -> Expr {
    if q.is_rational() {
        return Expr::Const(q.rational_part().clone());
    }
    let surd = Expr::pow(Expr::Const(Rat::from_int(q.radicand().clone())), Expr::frac(1, 2));
    normalize(&Expr::Add(vec![
        Expr::Const(q.rational_part().clone()),
        Expr::Mul(vec![Expr::Const(q.surd_part().clone()), surd]),
    ]))
}

/// Splits a normalized monomial into its rational coefficient and the rest.
fn split_monomial(e: Expr) -> (Rat, Expr) {
    match e {
        Expr::Const(c) => (c, Expr::one()),
        Expr::Mul(mut fs) => {
            if let Some(Expr::Const(c)) = fs.first().cloned() {
                fs.remove(0);
                let rest = if fs.len() == 1 { fs.pop().unwrap() } else { Expr::Mul(fs) };
                (c, rest)
            } else {
                (Rat::one(), Expr::Mul(fs))
            }
        }
        other => (Rat::one(), other),
    }
}

impl Coef {
    pub fn zero() -> Coef {
        Coef::default()
    }

    pub fn quad(q: Quad) -> Coef {
        let mut m = BTreeMap::new();
        if !q.is_zero() {
            m.insert(Expr::one(), q);
        }
        Coef(m)
    }

    pub fn rat(r: Rat) -> Coef {
        Coef::quad(Quad::rat(r))
    }

    pub fn one() -> Coef {
        Coef::rat(Rat::one())
    }

    /// A single symbolic atom (normalized; a rational prefactor is split off).
    /// Sums are split into their terms.
    pub fn atom(e: &Expr) -> Coef {
        let e = normalize(e);
        if let Expr::Add(ts) = e {
            return ts.iter().fold(Coef::zero(), |acc, t| acc + Coef::atom(t));
        }
        let (c, m) = split_monomial(e);
        if c.is_zero() {
            return Coef::zero();
        }
        let mut map = BTreeMap::new();
        map.insert(m, Quad::rat(c));
        Coef(map)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// The value when no symbolic atom is present.
    pub fn as_quad(&self) -> Option<Quad> {
        match self.0.len() {
            0 => Some(Quad::zero()),
            1 => self.0.get(&Expr::one()).cloned(),
            _ => None,
        }
    }

    pub fn as_rat(&self) -> Option<Rat> {
        self.as_quad().and_then(|q| q.as_rat().cloned())
    }

    pub fn is_numeric(&self) -> bool {
        self.as_quad().is_some()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Expr, &Quad)> {
        self.0.iter()
    }

    /// Coefficient of the monomial `m` (use `Expr::one()` for the constant part).
    pub fn get(&self, m: &Expr) -> Quad {
        self.0.get(m).cloned().unwrap_or_else(Quad::zero)
    }

    pub fn radicand(&self) -> Option<num_bigint::BigInt> {
        self.0.values().find(|q| !q.is_rational()).map(|q| q.radicand().clone())
    }

    pub fn try_add(&self, other: &Coef) -> Result<Coef, FieldMismatch> {
        let mut m = self.0.clone();
        for (k, q) in &other.0 {
            let cur = m.remove(k).unwrap_or_else(Quad::zero);
            let s = cur.try_add(q)?;
            if !s.is_zero() {
                m.insert(k.clone(), s);
            }
        }
        Ok(Coef(m))
    }

    pub fn try_scale(&self, q: &Quad) -> Result<Coef, FieldMismatch> {
        if q.is_zero() {
            return Ok(Coef::zero());
        }
        let mut m = BTreeMap::new();
        for (k, v) in &self.0 {
            m.insert(k.clone(), v.try_mul(q)?);
        }
        Ok(Coef(m))
    }

    pub fn try_mul(&self, other: &Coef) -> Result<Coef, FieldMismatch> {
        let mut acc = Coef::zero();
        for (k1, q1) in &self.0 {
            for (k2, q2) in &other.0 {
                let (c, key) = split_monomial(norm_mul(vec![k1.clone(), k2.clone()]));
                let q = q1.try_mul(q2)?.try_mul(&Quad::rat(c))?;
                let mut single = BTreeMap::new();
                if !q.is_zero() {
                    single.insert(key, q);
                }
                acc = acc.try_add(&Coef(single))?;
            }
        }
        Ok(acc)
    }

    /// Multiplicative inverse of a single-term coefficient.
    pub fn try_recip(&self) -> Option<Coef> {
        if self.0.len() != 1 {
            return None;
        }
        let (k, q) = self.0.iter().next().unwrap();
        if q.is_zero() {
            return None;
        }
        let (c, key) = split_monomial(norm_pow(k.clone(), Expr::int(-1)));
        let mut m = BTreeMap::new();
        m.insert(key, q.recip().try_mul(&Quad::rat(c)).ok()?);
        Some(Coef(m))
    }

    pub fn neg(&self) -> Coef {
        Coef(self.0.iter().map(|(k, q)| (k.clone(), -q)).collect())
    }

    pub fn to_expr(&self) -> Expr {
        let terms: Vec<Expr> = self
            .0
            .iter()
            .map(|(k, q)| Expr::Mul(vec![quad_to_expr(q), k.clone()]))
            .collect();
        normalize(&Expr::Add(terms))
    }

    pub fn eval(&self, b: &Bindings) -> Result<Quad, EvalError> {
        let mut acc = Quad::zero();
        for (k, q) in &self.0 {
            let v = eval_quad(k, b)?;
            acc = acc.try_add(&v.try_mul(q)?)?;
        }
        Ok(acc)
    }

    /// Substitutes a value for every occurrence of `name` in the monomials.
    pub fn subs(&self, name: &str, value: &Expr) -> Coef {
        self.0.iter().fold(Coef::zero(), |acc, (k, q)| {
            let term = Coef::atom(&k.subs(name, value)).try_scale(q).expect("scalar field");
            acc.try_add(&term).expect("single field")
        })
    }
}

impl From<Rat> for Coef {
    fn from(r: Rat) -> Coef {
        Coef::rat(r)
    }
}

impl From<Quad> for Coef {
    fn from(q: Quad) -> Coef {
        Coef::quad(q)
    }
}

impl std::ops::Add for Coef {
    type Output = Coef;
    fn add(self, rhs: Coef) -> Coef {
        self.try_add(&rhs).expect("quadratic field mismatch")
    }
}

impl std::ops::Sub for Coef {
    type Output = Coef;
    fn sub(self, rhs: Coef) -> Coef {
        self.try_add(&rhs.neg()).expect("quadratic field mismatch")
    }
}

impl std::ops::Mul for Coef {
    type Output = Coef;
    fn mul(self, rhs: Coef) -> Coef {
        self.try_mul(&rhs).expect("quadratic field mismatch")
    }
}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

impl fmt::Debug for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
