//! Symbolic expression trees.
//!
//! Trees are plain immutable values. The builders here do no simplification;
//! run [`Expr::normalize`](super::normalize) to reach canonical form. The
//! derived `Ord` (node kind first, then children lexicographically) is the
//! total order used to sort `Add`/`Mul` children.

use std::collections::BTreeSet;
use std::fmt;
use std::ops;

use super::rat::Rat;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Func {
    Log,
    Factorial,
    Binomial,
    /// `sum(body, k, lo, hi)`
    Sum,
    /// `prod(body, k, lo, hi)`
    Prod,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Log => "log",
            Func::Factorial => "factorial",
            Func::Binomial => "binomial",
            Func::Sum => "sum",
            Func::Prod => "prod",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "log" => Func::Log,
            "factorial" => Func::Factorial,
            "binomial" => Func::Binomial,
            "sum" => Func::Sum,
            "prod" => Func::Prod,
            _ => return None,
        })
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Log | Func::Factorial => 1,
            Func::Binomial => 2,
            Func::Sum | Func::Prod => 4,
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Const(Rat),
    Sym(String),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Func(Func, Vec<Expr>),
    /// A reference to a recurrence unknown, e.g. `x(n - 1)`.
    Unknown(String, Vec<Expr>),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Const(Rat::from(n))
    }

    pub fn rat(r: Rat) -> Expr {
        Expr::Const(r)
    }

    pub fn frac(n: i64, d: i64) -> Expr {
        Expr::Const(Rat::new(n, d))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn sym(name: &str) -> Expr {
        Expr::Sym(name.to_string())
    }

    pub fn pow(base: Expr, exp: Expr) -> Expr {
        Expr::Pow(Box::new(base), Box::new(exp))
    }

    pub fn powi(base: Expr, exp: i64) -> Expr {
        Expr::pow(base, Expr::int(exp))
    }

    pub fn recip(e: Expr) -> Expr {
        Expr::powi(e, -1)
    }

    pub fn func(f: Func, args: Vec<Expr>) -> Expr {
        Expr::Func(f, args)
    }

    pub fn log(e: Expr) -> Expr {
        Expr::Func(Func::Log, vec![e])
    }

    pub fn factorial(e: Expr) -> Expr {
        Expr::Func(Func::Factorial, vec![e])
    }

    pub fn unknown(name: &str, args: Vec<Expr>) -> Expr {
        Expr::Unknown(name.to_string(), args)
    }

    pub fn sum(terms: Vec<Expr>) -> Expr {
        Expr::Add(terms)
    }

    pub fn product(factors: Vec<Expr>) -> Expr {
        Expr::Mul(factors)
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        match self {
            Expr::Const(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(r) if r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(r) if r.is_one())
    }

    pub fn children(&self) -> &[Expr] {
        match self {
            Expr::Add(v) | Expr::Mul(v) | Expr::Func(_, v) | Expr::Unknown(_, v) => v,
            _ => &[],
        }
    }

    /// Pre-order traversal; bound variables of `sum`/`prod` are visited too.
    pub fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Pow(b, e) => {
                b.visit(f);
                e.visit(f);
            }
            _ => self.children().iter().for_each(|c| c.visit(f)),
        }
    }

    /// Free symbols, excluding the bound variables of `sum`/`prod`.
    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Expr::Sym(s) => {
                if !bound.contains(s) {
                    out.insert(s.clone());
                }
            }
            Expr::Pow(b, e) => {
                b.collect_free(bound, out);
                e.collect_free(bound, out);
            }
            Expr::Func(Func::Sum | Func::Prod, args) if args.len() == 4 => {
                args[2].collect_free(bound, out);
                args[3].collect_free(bound, out);
                if let Expr::Sym(k) = &args[1] {
                    bound.push(k.clone());
                    args[0].collect_free(bound, out);
                    bound.pop();
                } else {
                    args[0].collect_free(bound, out);
                }
            }
            _ => self
                .children()
                .iter()
                .for_each(|c| c.collect_free(bound, out)),
        }
    }

    pub fn depends_on(&self, var: &str) -> bool {
        self.free_symbols().contains(var)
    }

    pub fn contains_unknown(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if matches!(e, Expr::Unknown(..)) {
                found = true;
            }
        });
        found
    }

    pub fn contains_func(&self, func: Func) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if matches!(e, Expr::Func(f, _) if *f == func) {
                found = true;
            }
        });
        found
    }

    /// Replaces free occurrences of symbol `name` by `value`.
    pub fn subs(&self, name: &str, value: &Expr) -> Expr {
        match self {
            Expr::Sym(s) if s == name => value.clone(),
            Expr::Const(_) | Expr::Sym(_) => self.clone(),
            Expr::Add(v) => Expr::Add(v.iter().map(|c| c.subs(name, value)).collect()),
            Expr::Mul(v) => Expr::Mul(v.iter().map(|c| c.subs(name, value)).collect()),
            Expr::Pow(b, e) => Expr::pow(b.subs(name, value), e.subs(name, value)),
            Expr::Func(f @ (Func::Sum | Func::Prod), args)
                if matches!(args.get(1), Some(Expr::Sym(k)) if k == name) =>
            {
                let mut args = args.clone();
                args[2] = args[2].subs(name, value);
                args[3] = args[3].subs(name, value);
                Expr::Func(*f, args)
            }
            Expr::Func(f, v) => Expr::Func(*f, v.iter().map(|c| c.subs(name, value)).collect()),
            Expr::Unknown(u, v) => {
                Expr::Unknown(u.clone(), v.iter().map(|c| c.subs(name, value)).collect())
            }
        }
    }

    /// Bottom-up rewrite of `Unknown` nodes.
    pub fn map_unknowns(&self, f: &mut dyn FnMut(&str, &[Expr]) -> Option<Expr>) -> Expr {
        match self {
            Expr::Const(_) | Expr::Sym(_) => self.clone(),
            Expr::Add(v) => Expr::Add(v.iter().map(|c| c.map_unknowns(f)).collect()),
            Expr::Mul(v) => Expr::Mul(v.iter().map(|c| c.map_unknowns(f)).collect()),
            Expr::Pow(b, e) => Expr::pow(b.map_unknowns(f), e.map_unknowns(f)),
            Expr::Func(fun, v) => Expr::Func(*fun, v.iter().map(|c| c.map_unknowns(f)).collect()),
            Expr::Unknown(u, v) => {
                let args: Vec<Expr> = v.iter().map(|c| c.map_unknowns(f)).collect();
                f(u, &args).unwrap_or_else(|| Expr::Unknown(u.clone(), args))
            }
        }
    }

    /// True when the leading coefficient is negative (used by rendering).
    fn is_negative_term(&self) -> bool {
        match self {
            Expr::Const(r) => r.is_negative(),
            Expr::Mul(v) => matches!(v.first(), Some(Expr::Const(r)) if r.is_negative()),
            _ => false,
        }
    }

    fn negated_for_display(&self) -> Expr {
        match self {
            Expr::Const(r) => Expr::Const(-r),
            Expr::Mul(v) => {
                let mut v = v.clone();
                if let Expr::Const(r) = &v[0] {
                    let r = -r;
                    if r.is_one() && v.len() > 1 {
                        v.remove(0);
                    } else {
                        v[0] = Expr::Const(r);
                    }
                }
                if v.len() == 1 {
                    v.pop().unwrap()
                } else {
                    Expr::Mul(v)
                }
            }
            _ => self.clone(),
        }
    }
}

impl From<Rat> for Expr {
    fn from(r: Rat) -> Expr {
        Expr::Const(r)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, rhs])
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, -rhs])
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(vec![self, rhs])
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Mul(vec![self, Expr::recip(rhs)])
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Mul(vec![Expr::int(-1), self])
    }
}

// ---- canonical text rendering ----

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Const(r) if r.is_negative() => PREC_NEG,
        Expr::Const(r) if !r.is_integer() => PREC_MUL,
        Expr::Add(_) => PREC_ADD,
        Expr::Mul(_) => {
            if e.is_negative_term() {
                PREC_NEG
            } else {
                PREC_MUL
            }
        }
        Expr::Pow(..) => PREC_POW,
        _ => PREC_ATOM,
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if precedence(e) < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Splits a product into numerator factors and denominator factors (those
/// raised to a negative integer power).
fn split_fraction(factors: &[Expr]) -> (Vec<Expr>, Vec<Expr>) {
    let mut num = Vec::new();
    let mut den = Vec::new();
    for f in factors {
        match f {
            Expr::Pow(b, e) => match e.as_rat() {
                Some(k) if k.is_negative() && k.is_integer() => {
                    let k = -k;
                    den.push(if k.is_one() {
                        (**b).clone()
                    } else {
                        Expr::pow((**b).clone(), Expr::Const(k))
                    });
                }
                _ => num.push(f.clone()),
            },
            _ => num.push(f.clone()),
        }
    }
    (num, den)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(r) => write!(f, "{r}"),
            Expr::Sym(s) => write!(f, "{s}"),
            Expr::Add(terms) => {
                // non-constant terms in canonical order, constant last
                let mut ordered: Vec<&Expr> =
                    terms.iter().filter(|t| !matches!(t, Expr::Const(_))).collect();
                ordered.extend(terms.iter().filter(|t| matches!(t, Expr::Const(_))));
                for (i, t) in ordered.iter().enumerate() {
                    if i == 0 {
                        write_wrapped(f, t, PREC_ADD + 1)?;
                    } else if t.is_negative_term() {
                        write!(f, " - ")?;
                        write_wrapped(f, &t.negated_for_display(), PREC_ADD + 1)?;
                    } else {
                        write!(f, " + ")?;
                        write_wrapped(f, t, PREC_ADD + 1)?;
                    }
                }
                Ok(())
            }
            Expr::Mul(factors) => {
                let (mut num, den) = split_fraction(factors);
                if let Some(Expr::Const(r)) = num.first() {
                    if (r.is_one() || (-r).is_one()) && (num.len() > 1 || !den.is_empty()) {
                        if r.is_negative() {
                            write!(f, "-")?;
                        }
                        num.remove(0);
                    }
                }
                if num.is_empty() {
                    write!(f, "1")?;
                }
                for (i, t) in num.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    match t {
                        Expr::Const(r) if i == 0 => write!(f, "{r}")?,
                        _ => write_wrapped(f, t, PREC_POW)?,
                    }
                }
                if !den.is_empty() {
                    write!(f, "/")?;
                    if den.len() == 1 {
                        write_wrapped(f, &den[0], PREC_POW)?;
                    } else {
                        write!(f, "(")?;
                        for (i, t) in den.iter().enumerate() {
                            if i > 0 {
                                write!(f, "*")?;
                            }
                            write_wrapped(f, t, PREC_POW)?;
                        }
                        write!(f, ")")?;
                    }
                }
                Ok(())
            }
            Expr::Pow(b, e) => {
                write_wrapped(f, b, PREC_ATOM)?;
                write!(f, "^")?;
                match &**e {
                    Expr::Const(r) if r.is_integer() && !r.is_negative() => write!(f, "{r}"),
                    other => write_wrapped(f, other, PREC_ATOM),
                }
            }
            Expr::Func(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Expr::Unknown(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
