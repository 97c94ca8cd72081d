//! Exponential polynomials `Σ p_i(n)·β_i^n`.
//!
//! Bases are exact nonzero values in a quadratic field (negative bases are
//! allowed, as needed by e.g. Fibonacci's `(1 - √5)/2`); coefficients are
//! `Coef`s, so symbolic initial values and parameters ride along. Terms are
//! kept sorted by base, each with a nonzero polynomial.

use std::fmt;

use num_traits::ToPrimitive;

use super::coef::{quad_to_expr, Coef};
use super::eval::{eval_quad, Bindings, EvalError};
use super::expr::Expr;
use super::normalize::normalize;
use super::poly::Poly;
use super::quad::{FieldMismatch, Quad};
use super::rat::Rat;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not an exponential polynomial: {0}")]
pub struct NotExpPoly(pub String);

impl From<FieldMismatch> for NotExpPoly {
    fn from(e: FieldMismatch) -> NotExpPoly {
        NotExpPoly(e.to_string())
    }
}

/// One term group: `base^n · Σ_d coeffs[d]·n^d`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExpTerm {
    pub base: Quad,
    pub coeffs: Vec<Coef>,
}

impl ExpTerm {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, d: usize) -> Coef {
        self.coeffs.get(d).cloned().unwrap_or_else(Coef::zero)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ExpPoly {
    terms: Vec<ExpTerm>,
}

fn trim(cs: &mut Vec<Coef>) {
    while cs.last().is_some_and(|c| c.is_zero()) {
        cs.pop();
    }
}

fn add_coeff_vecs(a: &[Coef], b: &[Coef]) -> Result<Vec<Coef>, FieldMismatch> {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).cloned().unwrap_or_else(Coef::zero);
        let y = b.get(i).cloned().unwrap_or_else(Coef::zero);
        out.push(x.try_add(&y)?);
    }
    trim(&mut out);
    Ok(out)
}

fn binomial(n: usize, k: usize) -> Rat {
    let mut acc = Rat::one();
    for i in 0..k {
        acc = acc * Rat::from((n - i) as i64) / Rat::from((i + 1) as i64);
    }
    acc
}

impl ExpPoly {
    pub fn zero() -> ExpPoly {
        ExpPoly::default()
    }

    pub fn constant(c: Coef) -> ExpPoly {
        ExpPoly::monomial(c, 0, Quad::one())
    }

    pub fn rat(r: Rat) -> ExpPoly {
        ExpPoly::constant(Coef::rat(r))
    }

    /// The index variable `n`.
    pub fn n() -> ExpPoly {
        ExpPoly::monomial(Coef::one(), 1, Quad::one())
    }

    /// `c · n^d · base^n`.
    pub fn monomial(c: Coef, d: usize, base: Quad) -> ExpPoly {
        if c.is_zero() {
            return ExpPoly::zero();
        }
        assert!(!base.is_zero(), "zero base");
        let mut coeffs = vec![Coef::zero(); d + 1];
        coeffs[d] = c;
        ExpPoly { terms: vec![ExpTerm { base, coeffs }] }
    }

    pub fn from_poly(p: &Poly) -> ExpPoly {
        let coeffs: Vec<Coef> = (0..=p.degree()).map(|d| Coef::rat(p.coeff(d))).collect();
        let mut coeffs = coeffs;
        trim(&mut coeffs);
        if coeffs.is_empty() {
            return ExpPoly::zero();
        }
        ExpPoly { terms: vec![ExpTerm { base: Quad::one(), coeffs }] }
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, base: &Quad) -> Option<&ExpTerm> {
        self.terms.iter().find(|t| &t.base == base)
    }

    /// Coefficient of `n^d·base^n`.
    pub fn coeff(&self, base: &Quad, d: usize) -> Coef {
        self.term(base).map(|t| t.coeff(d)).unwrap_or_else(Coef::zero)
    }

    pub fn is_polynomial(&self) -> bool {
        self.terms.iter().all(|t| t.base.is_one())
    }

    /// The value when the expression does not depend on `n`.
    pub fn as_constant(&self) -> Option<Coef> {
        match self.terms.as_slice() {
            [] => Some(Coef::zero()),
            [t] if t.base.is_one() && t.coeffs.len() == 1 => Some(t.coeffs[0].clone()),
            _ => None,
        }
    }

    /// Polynomial part with rational coefficients, when everything is rational.
    pub fn as_rat_poly(&self) -> Option<Poly> {
        if !self.is_polynomial() {
            return None;
        }
        match self.terms.first() {
            None => Some(Poly::zero()),
            Some(t) => t
                .coeffs
                .iter()
                .map(|c| c.as_rat())
                .collect::<Option<Vec<Rat>>>()
                .map(Poly::from_coeffs),
        }
    }

    pub fn radicand(&self) -> Option<num_bigint::BigInt> {
        self.terms.iter().find_map(|t| {
            if !t.base.is_rational() {
                Some(t.base.radicand().clone())
            } else {
                t.coeffs.iter().find_map(|c| c.radicand())
            }
        })
    }

    /// Whether any coefficient mentions a symbolic atom.
    pub fn is_numeric(&self) -> bool {
        self.terms.iter().all(|t| t.coeffs.iter().all(|c| c.is_numeric()))
    }

    fn insert(&mut self, base: Quad, coeffs: Vec<Coef>) -> Result<(), FieldMismatch> {
        match self.terms.binary_search_by(|t| t.base.total_cmp(&base)) {
            Ok(i) => {
                let sum = add_coeff_vecs(&self.terms[i].coeffs, &coeffs)?;
                if sum.is_empty() {
                    self.terms.remove(i);
                } else {
                    self.terms[i].coeffs = sum;
                }
            }
            Err(i) => {
                let mut coeffs = coeffs;
                trim(&mut coeffs);
                if !coeffs.is_empty() {
                    self.terms.insert(i, ExpTerm { base, coeffs });
                }
            }
        }
        Ok(())
    }

    pub fn try_add(&self, other: &ExpPoly) -> Result<ExpPoly, FieldMismatch> {
        let mut out = self.clone();
        for t in &other.terms {
            out.insert(t.base.clone(), t.coeffs.clone())?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> ExpPoly {
        ExpPoly {
            terms: self
                .terms
                .iter()
                .map(|t| ExpTerm { base: t.base.clone(), coeffs: t.coeffs.iter().map(Coef::neg).collect() })
                .collect(),
        }
    }

    pub fn try_sub(&self, other: &ExpPoly) -> Result<ExpPoly, FieldMismatch> {
        self.try_add(&other.neg())
    }

    pub fn try_scale(&self, c: &Coef) -> Result<ExpPoly, FieldMismatch> {
        let mut out = ExpPoly::zero();
        for t in &self.terms {
            let coeffs = t.coeffs.iter().map(|x| x.try_mul(c)).collect::<Result<Vec<_>, _>>()?;
            out.insert(t.base.clone(), coeffs)?;
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &ExpPoly) -> Result<ExpPoly, FieldMismatch> {
        let mut out = ExpPoly::zero();
        for a in &self.terms {
            for b in &other.terms {
                let base = a.base.try_mul(&b.base)?;
                let mut coeffs = vec![Coef::zero(); a.coeffs.len() + b.coeffs.len() - 1];
                for (i, x) in a.coeffs.iter().enumerate() {
                    for (j, y) in b.coeffs.iter().enumerate() {
                        coeffs[i + j] = coeffs[i + j].try_add(&x.try_mul(y)?)?;
                    }
                }
                out.insert(base, coeffs)?;
            }
        }
        Ok(out)
    }

    /// `f(n + k)`.
    pub fn shift(&self, k: i64) -> ExpPoly {
        let kr = Rat::from(k);
        let mut out = ExpPoly::zero();
        for t in &self.terms {
            let factor = t.base.pow(k);
            let mut coeffs = vec![Coef::zero(); t.coeffs.len()];
            for (d, c) in t.coeffs.iter().enumerate() {
                for (j, slot) in coeffs.iter_mut().enumerate().take(d + 1) {
                    let w = binomial(d, j) * kr.pow((d - j) as i64);
                    let add = c.try_scale(&Quad::rat(w)).and_then(|x| x.try_scale(&factor));
                    *slot = slot.try_add(&add.expect("single field")).expect("single field");
                }
            }
            out.insert(t.base.clone(), coeffs).expect("single field");
        }
        out
    }

    /// Value at integer `n` as a (possibly symbolic) coefficient.
    pub fn value_coef(&self, n: i64) -> Coef {
        self.shift(n).terms.iter().fold(Coef::zero(), |acc, t| acc.try_add(&t.coeff(0)).expect("single field"))
    }

    /// Value at integer `n`, with symbolic atoms resolved from `b`.
    pub fn eval(&self, n: i64, b: &Bindings) -> Result<Quad, EvalError> {
        let nr = Rat::from(n);
        let mut acc = Quad::zero();
        for t in &self.terms {
            if t.base.is_zero() {
                continue;
            }
            let mut p = Quad::zero();
            for (d, c) in t.coeffs.iter().enumerate() {
                let v = c.eval(b)?;
                p = p.try_add(&v.try_mul(&Quad::rat(nr.pow(d as i64)))?)?;
            }
            if n < 0 && t.base.is_zero() {
                return Err(EvalError::DivisionByZero);
            }
            acc = acc.try_add(&p.try_mul(&t.base.pow(n))?)?;
        }
        Ok(acc)
    }

    pub fn eval_rat(&self, n: i64, b: &Bindings) -> Result<Rat, EvalError> {
        let q = self.eval(n, b)?;
        q.as_rat().cloned().ok_or_else(|| EvalError::NonRational(q.to_string()))
    }

    pub fn map_coeffs(&self, f: &mut dyn FnMut(&Coef) -> Coef) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for t in &self.terms {
            out.insert(t.base.clone(), t.coeffs.iter().map(&mut *f).collect()).expect("single field");
        }
        out
    }

    /// Canonical expression in `var`.
    pub fn to_expr(&self, var: &str) -> Expr {
        let n = Expr::sym(var);
        let mut parts = Vec::new();
        for t in &self.terms {
            let geo = if t.base.is_one() {
                Expr::one()
            } else {
                Expr::pow(quad_to_expr(&t.base), n.clone())
            };
            for (d, c) in t.coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                parts.push(Expr::Mul(vec![c.to_expr(), Expr::powi(n.clone(), d as i64), geo.clone()]));
            }
        }
        normalize(&Expr::Add(parts))
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr("n"))
    }
}

impl fmt::Debug for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({}, {:?})", t.base, t.coeffs)?;
        }
        f.write_str("]")
    }
}

/// Value of an index-free subexpression as a coefficient.
fn free_coef(e: &Expr) -> Result<Coef, NotExpPoly> {
    let symbolic = !e.free_symbols().is_empty() || e.contains_unknown();
    if !symbolic {
        match eval_quad(e, &Bindings::new()) {
            Ok(q) => return Ok(Coef::quad(q)),
            Err(EvalError::NonRational(_)) | Err(EvalError::TooLarge) => return Ok(Coef::atom(e)),
            Err(EvalError::Field(m)) => return Err(m.into()),
            Err(err) => return Err(NotExpPoly(format!("{e}: {err}"))),
        }
    }
    match e {
        Expr::Add(ts) => ts.iter().try_fold(Coef::zero(), |acc, t| Ok(acc.try_add(&free_coef(t)?)?)),
        Expr::Mul(fs) => fs.iter().try_fold(Coef::one(), |acc, f| Ok(acc.try_mul(&free_coef(f)?)?)),
        Expr::Pow(b, x) => match x.as_rat().and_then(|k| k.to_i64()) {
            Some(k) if (0..=64).contains(&k) => {
                let base = free_coef(b)?;
                let mut acc = Coef::one();
                for _ in 0..k {
                    acc = acc.try_mul(&base)?;
                }
                Ok(acc)
            }
            Some(k) if (-64..0).contains(&k) => {
                let base = free_coef(b)?;
                let Some(inv) = base.try_recip() else {
                    return Ok(Coef::atom(e));
                };
                let mut acc = Coef::one();
                for _ in 0..-k {
                    acc = acc.try_mul(&inv)?;
                }
                Ok(acc)
            }
            _ => Ok(Coef::atom(e)),
        },
        _ => Ok(Coef::atom(e)),
    }
}

/// `b^r` for an exact base and rational exponent, when representable.
fn quad_rat_pow(b: &Quad, r: &Rat) -> Option<Quad> {
    if let Some(k) = r.to_i64() {
        if b.is_zero() && k <= 0 {
            return None;
        }
        return Some(b.pow(k));
    }
    let br = b.as_rat()?;
    if !br.is_positive() {
        return None;
    }
    let q = r.denom().to_u32()?;
    let p = r.numer().to_i64()?;
    if let Some(root) = br.nth_root_exact(q) {
        return Some(Quad::rat(root.pow(p)));
    }
    if q == 2 {
        return Some(Quad::sqrt_rat(br)?.pow(p));
    }
    None
}

/// Splits `x` as `a·var + c` with `a`, `c` free of `var`.
fn affine_parts(x: &Expr, var: &str) -> Option<(Expr, Expr)> {
    let terms = match x {
        Expr::Add(ts) => ts.clone(),
        other => vec![other.clone()],
    };
    let v = Expr::sym(var);
    let (mut a, mut c) = (Vec::new(), Vec::new());
    for t in terms {
        if !t.depends_on(var) {
            c.push(t);
        } else if t == v {
            a.push(Expr::one());
        } else if let Expr::Mul(fs) = &t {
            let pos = fs.iter().position(|f| *f == v)?;
            let mut rest = fs.clone();
            rest.remove(pos);
            if rest.iter().any(|f| f.depends_on(var)) {
                return None;
            }
            a.push(Expr::Mul(rest));
        } else {
            return None;
        }
    }
    Some((normalize(&Expr::Add(a)), normalize(&Expr::Add(c))))
}

/// `b^x` as an exact quadratic number, for rational `x` or log-valued `x`
/// that collapses (e.g. `2^(log 7/log 2) = 7`).
fn exact_pow(b: &Expr, base: &Quad, x: &Expr) -> Option<Quad> {
    if let Some(r) = x.as_rat() {
        return quad_rat_pow(base, r);
    }
    if !x.free_symbols().is_empty() {
        return None;
    }
    eval_quad(&Expr::pow(b.clone(), x.clone()), &Bindings::new()).ok()
}

fn convert(e: &Expr, var: &str) -> Result<ExpPoly, NotExpPoly> {
    if !e.depends_on(var) {
        return Ok(ExpPoly::constant(free_coef(e)?));
    }
    match e {
        Expr::Sym(_) => Ok(ExpPoly::n()),
        Expr::Add(ts) => ts.iter().try_fold(ExpPoly::zero(), |acc, t| Ok(acc.try_add(&convert(t, var)?)?)),
        Expr::Mul(fs) => fs
            .iter()
            .try_fold(ExpPoly::rat(Rat::one()), |acc, f| Ok(acc.try_mul(&convert(f, var)?)?)),
        Expr::Pow(b, x) if !x.depends_on(var) => {
            let k = x
                .as_rat()
                .and_then(|k| k.to_i64())
                .ok_or_else(|| NotExpPoly(format!("non-integer power of the index in {e}")))?;
            let base = convert(b, var)?;
            if k >= 0 {
                if k > 64 {
                    return Err(NotExpPoly(format!("power too large in {e}")));
                }
                let mut acc = ExpPoly::rat(Rat::one());
                for _ in 0..k {
                    acc = acc.try_mul(&base)?;
                }
                return Ok(acc);
            }
            // only a single pure exponential can be inverted
            match base.terms() {
                [t] if t.coeffs.len() == 1 => {
                    let inv = t.coeffs[0].try_recip().ok_or_else(|| NotExpPoly(format!("cannot invert {b}")))?;
                    let single = ExpPoly::monomial(inv, 0, t.base.recip());
                    let mut acc = ExpPoly::rat(Rat::one());
                    for _ in 0..-k {
                        acc = acc.try_mul(&single)?;
                    }
                    Ok(acc)
                }
                _ => Err(NotExpPoly(format!("negative power of a non-exponential in {e}"))),
            }
        }
        Expr::Pow(b, x) => {
            if b.depends_on(var) || !b.free_symbols().is_empty() || b.contains_unknown() {
                return Err(NotExpPoly(format!("non-constant base in {e}")));
            }
            let base = eval_quad(b, &Bindings::new()).map_err(|err| NotExpPoly(format!("{b}: {err}")))?;
            if base.is_zero() {
                return Err(NotExpPoly(format!("zero base in {e}")));
            }
            let (a, c) = affine_parts(x, var)
                .ok_or_else(|| NotExpPoly(format!("exponent not affine in {var}: {x}")))?;
            let step = exact_pow(b, &base, &a).ok_or_else(|| NotExpPoly(format!("{b}^({a}) not exact")))?;
            let offset = match exact_pow(b, &base, &c) {
                Some(q) => Coef::quad(q),
                None => Coef::atom(&Expr::pow(b.as_ref().clone(), c.clone())),
            };
            Ok(ExpPoly::monomial(offset, 0, step))
        }
        Expr::Func(f, _) => Err(NotExpPoly(format!("{} of the index", f.name()))),
        Expr::Unknown(name, _) => Err(NotExpPoly(format!("unknown function {name}"))),
        Expr::Const(_) => unreachable!(),
    }
}

/// Canonical exponential polynomial in `var` equal to `e`.
pub fn to_expoly(e: &Expr, var: &str) -> Result<ExpPoly, NotExpPoly> {
    convert(&normalize(e), var)
}
