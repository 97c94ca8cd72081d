//! Closed forms for sums and products: exponential-polynomial summation,
//! Gosper's algorithm and products of rational-root factors.

use thiserror::Error;

use crate::exprcore::linalg::{solve, LinearOutcome};
use crate::exprcore::poly::{poly_from_expr, ratfunc_from_expr, RatFunc};
use crate::exprcore::{normalize, Coef, ExpPoly, Expr, Func, Poly, Quad, Rat};

fn binomial(n: usize, k: usize) -> Rat {
    let mut r = Rat::one();
    for i in 0..k {
        r = r * Rat::from((n - i) as i64) / Rat::from((i + 1) as i64);
    }
    r
}

/// `F` with `F(k+1) - F(k) = xp(k)`.
pub fn antidifference(xp: &ExpPoly) -> ExpPoly {
    let mut out = ExpPoly::zero();
    for t in xp.terms() {
        let d = t.degree();
        let p: Vec<Coef> = (0..=d).map(|i| t.coeff(i)).collect();
        let b = t.base.clone();
        if b.is_one() {
            // q(k+1) - q(k) = p(k), deg q = d + 1, q(0) = 0
            let mut c = vec![Coef::zero(); d + 2];
            for i in (0..=d).rev() {
                let mut acc = p[i].clone();
                for (j, cj) in c.iter().enumerate().skip(i + 2) {
                    acc = acc - cj.try_scale(&Quad::rat(binomial(j, i))).expect("single field");
                }
                c[i + 1] = acc.try_scale(&Quad::rat(Rat::from((i + 1) as i64).recip())).expect("single field");
            }
            for (j, cj) in c.into_iter().enumerate() {
                out = out.try_add(&ExpPoly::monomial(cj, j, Quad::one())).expect("single field");
            }
        } else {
            // b·q(k+1) - q(k) = p(k), deg q = d
            let inv = b.try_sub(&Quad::one()).expect("single field").recip();
            let mut c = vec![Coef::zero(); d + 1];
            for i in (0..=d).rev() {
                let mut acc = p[i].clone();
                for (j, cj) in c.iter().enumerate().skip(i + 1) {
                    let w = b.try_mul(&Quad::rat(binomial(j, i))).expect("single field");
                    acc = acc - cj.try_scale(&w).expect("single field");
                }
                c[i] = acc.try_scale(&inv).expect("single field");
            }
            for (j, cj) in c.into_iter().enumerate() {
                out = out.try_add(&ExpPoly::monomial(cj, j, b.clone())).expect("single field");
            }
        }
    }
    out
}

/// Value at index zero as a coefficient.
fn at_zero(xp: &ExpPoly) -> Coef {
    xp.terms().iter().fold(Coef::zero(), |acc, t| acc + t.coeff(0))
}

/// `Σ_{k=lo}^{n+upper_shift} xp(k)` as an exponential polynomial in `n`,
/// valid whenever `n + upper_shift >= lo - 1`.
pub fn sum_expoly(xp: &ExpPoly, lo: i64, upper_shift: i64) -> ExpPoly {
    let f = antidifference(xp);
    let base = at_zero(&f.shift(lo));
    f.shift(upper_shift + 1).try_sub(&ExpPoly::constant(base)).expect("single field")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GosperError {
    #[error("term is not hypergeometric: {0}")]
    NotHypergeometric(String),
    #[error("term has no hypergeometric antidifference")]
    NotGosperSummable,
}

/// Nonnegative integers `h` for which `a(k)` and `b(k+h)` share a factor.
fn dispersion_set(a: &Poly, b: &Poly) -> Vec<i64> {
    if a.degree() == 0 || b.degree() == 0 {
        return Vec::new();
    }
    let n = (a.degree() * b.degree()) as i64;
    let points: Vec<(Rat, Rat)> =
        (0..=n).map(|h| (Rat::from(h), a.resultant(&b.shift(&Rat::from(h))))).collect();
    let r = Poly::interpolate(&points);
    let mut hs: Vec<i64> = r
        .rational_roots()
        .into_iter()
        .filter(|h| h.is_integer() && !h.is_negative())
        .filter_map(|h| h.to_i64())
        .collect();
    hs.dedup();
    hs
}

/// Degree bound for `x` in `A·x(k+1) - B·x(k) = c`.
fn gosper_degree(a: &Poly, b: &Poly, c: &Poly) -> Option<u32> {
    let p = a + b;
    let m = a - b;
    let dc = c.degree() as i64;
    let mut best: Option<i64> = None;
    if p.is_zero() || (!m.is_zero() && m.degree() >= p.degree()) {
        best = Some(dc - m.degree() as i64);
    } else {
        let lp = p.degree() as i64;
        best = best.max(Some(dc - lp + 1));
        let d0 = -Rat::from(2) * m.coeff((lp - 1) as u32) / p.lead();
        if d0.is_integer() {
            best = best.max(d0.to_i64());
        }
    }
    best.filter(|d| (0..=256).contains(d)).map(|d| d as u32)
}

/// An antidifference `S` with `S(k) - S(k-1) = t(k)`.
pub fn gosper(t: &Expr, k: &str) -> Result<Expr, GosperError> {
    let rf = match term_ratio(t, k) {
        Some(rf) => rf,
        None => {
            let next = t.subs(k, &(Expr::sym(k) + Expr::one()));
            let ratio = normalize(&(next / t.clone()));
            ratfunc_from_expr(&ratio, k).ok_or_else(|| GosperError::NotHypergeometric(ratio.to_string()))?
        }
    };
    if rf.is_zero() {
        return Err(GosperError::NotHypergeometric("term vanishes".into()));
    }
    let (mut a, mut b) = (rf.num.clone(), rf.den.clone());
    let mut c = Poly::one();
    for h in dispersion_set(&a, &b) {
        let g = a.gcd(&b.shift(&Rat::from(h)));
        if g.degree() == 0 {
            continue;
        }
        a = a.div_rem(&g).0;
        b = b.div_rem(&g.shift(&Rat::from(-h))).0;
        for i in 1..=h {
            c = &c * &g.shift(&Rat::from(-i));
        }
    }
    let bm = b.shift(&Rat::from(-1));
    let deg = gosper_degree(&a, &bm, &c).ok_or(GosperError::NotGosperSummable)?;
    // columns: coefficients of x; rows: powers of k
    let cols = deg as usize + 1;
    let mut lhs: Vec<Poly> = Vec::with_capacity(cols);
    for j in 0..cols {
        let kj = Poly::monomial(Rat::one(), j as u32);
        lhs.push(&(&a * &kj.shift(&Rat::one())) - &(&bm * &kj));
    }
    let rows = lhs.iter().map(|p| p.degree()).chain([c.degree()]).max().unwrap() as usize + 1;
    let m: Vec<Vec<Quad>> =
        (0..rows).map(|i| lhs.iter().map(|p| Quad::rat(p.coeff(i as u32))).collect()).collect();
    let rhs: Vec<Coef> = (0..rows).map(|i| Coef::rat(c.coeff(i as u32))).collect();
    let LinearOutcome::Solved(sol) = solve(m, rhs).expect("rational system") else {
        return Err(GosperError::NotGosperSummable);
    };
    let x = Poly::from_coeffs(sol.iter().map(|s| s.as_rat().expect("rational solution")));
    // fold the rational part of t into the factor so common roots cancel
    let mut rational = RatFunc::new(&(&bm * &x) + &c, c);
    let mut rest = Vec::new();
    let factors = match t {
        Expr::Mul(fs) => fs.clone(),
        other => vec![other.clone()],
    };
    for f in factors {
        match ratfunc_from_expr(&normalize(&f), k) {
            Some(r) => rational = rational.mul(&r),
            None => rest.push(f),
        }
    }
    rest.push(rational.to_expr(k));
    Ok(normalize(&Expr::Mul(rest)))
}

/// `t(k+1)/t(k)` computed factor by factor.
fn term_ratio(t: &Expr, k: &str) -> Option<RatFunc> {
    if !t.depends_on(k) {
        return Some(RatFunc::constant(Rat::one()));
    }
    match t {
        Expr::Mul(fs) => fs.iter().try_fold(RatFunc::constant(Rat::one()), |acc, f| Some(acc.mul(&term_ratio(f, k)?))),
        Expr::Pow(b, x) if !b.depends_on(k) => {
            let b = normalize(b).as_rat()?.clone();
            let e = poly_from_expr(&normalize(x), k)?;
            if e.degree() > 1 || b.is_zero() {
                return None;
            }
            let slope = e.coeff(1);
            Some(RatFunc::constant(b.pow(slope.is_integer().then(|| slope.to_i64())??)))
        }
        Expr::Pow(b, x) if !x.depends_on(k) => {
            let n = normalize(x).as_rat()?.to_i64()?;
            let r = term_ratio(b, k)?;
            let mut acc = RatFunc::constant(Rat::one());
            for _ in 0..n.abs() {
                acc = acc.mul(&r);
            }
            Some(if n < 0 { RatFunc::constant(Rat::one()).div(&acc) } else { acc })
        }
        Expr::Func(Func::Factorial, args) => {
            let a = poly_from_expr(&normalize(&args[0]), k)?;
            let m = a.coeff(1).to_i64()?;
            if a.degree() != 1 || m < 1 {
                return None;
            }
            let mut acc = Poly::one();
            for i in 1..=m {
                acc = &acc * &(&a + &Poly::constant(Rat::from(i)));
            }
            Some(RatFunc::poly(acc))
        }
        _ => {
            let r = ratfunc_from_expr(&normalize(t), k)?;
            if r.is_zero() {
                return None;
            }
            Some(RatFunc::new(r.num.shift(&Rat::one()), r.den.shift(&Rat::one())).div(&r))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProductError {
    #[error("factor `{0}` does not split into rational linear factors")]
    NotFactorable(String),
    #[error("factor vanishes or has a pole inside the range at k = {0}")]
    Singular(Rat),
}

/// Leading coefficient and integer roots with multiplicity.
fn split_linear(p: &Poly, lo: &Expr) -> Result<(Rat, Vec<Rat>), ProductError> {
    let roots = p.rational_roots();
    if roots.len() as u32 != p.degree() {
        return Err(ProductError::NotFactorable(p.to_expr("k").to_string()));
    }
    for r in &roots {
        if !r.is_integer() {
            return Err(ProductError::NotFactorable(p.to_expr("k").to_string()));
        }
        if let Some(l) = lo.as_rat() {
            if r >= l {
                return Err(ProductError::Singular(r.clone()));
            }
        }
    }
    Ok((p.lead(), roots))
}

/// `Π_{k=lo}^{hi} a(k)` for a rational function `a` whose numerator and
/// denominator split over the integers.
pub fn product_closed(a: &Expr, k: &str, lo: &Expr, hi: &Expr) -> Result<Expr, ProductError> {
    let rf = ratfunc_from_expr(&normalize(a), k).ok_or_else(|| ProductError::NotFactorable(a.to_string()))?;
    let (cn, num_roots) = split_linear(&rf.num, lo)?;
    let (cd, den_roots) = split_linear(&rf.den, lo)?;
    let count = hi.clone() - lo.clone() + Expr::one();
    let mut factors = vec![Expr::pow(Expr::Const(cn / cd), count)];
    let block = |r: &Rat| {
        let r = Expr::Const(r.clone());
        Expr::factorial(hi.clone() - r.clone()) / Expr::factorial(lo.clone() - r - Expr::one())
    };
    factors.extend(num_roots.iter().map(block));
    factors.extend(den_roots.iter().map(|r| Expr::recip(block(r))));
    Ok(normalize(&Expr::Mul(factors)))
}

/// Rewrites every `sum(...)` whose body is an exponential polynomial in the
/// bound variable and whose limits are affine into a closed form.
pub fn close_sums(e: &Expr, var: &str) -> Expr {
    let children: Vec<Expr> = e.children().iter().map(|c| close_sums(c, var)).collect();
    let rebuilt = match e {
        Expr::Add(_) => Expr::Add(children),
        Expr::Mul(_) => Expr::Mul(children),
        Expr::Pow(b, x) => Expr::pow(close_sums(b, var), close_sums(x, var)),
        Expr::Func(f, _) => Expr::Func(*f, children),
        Expr::Unknown(n, _) => Expr::Unknown(n.clone(), children),
        other => other.clone(),
    };
    if let Expr::Func(Func::Sum, args) = &rebuilt {
        if let Some(closed) = close_one_sum(args, var) {
            return closed;
        }
    }
    rebuilt
}

fn close_one_sum(args: &[Expr], var: &str) -> Option<Expr> {
    let Expr::Sym(k) = &args[1] else { return None };
    let body = crate::exprcore::to_expoly(&args[0], k).ok()?;
    let lo = normalize(&args[2]).as_rat()?.to_i64()?;
    let shift = normalize(&(args[3].clone() - Expr::sym(var))).as_rat()?.to_i64()?;
    Some(sum_expoly(&body, lo, shift).to_expr(var))
}

/// Rewrites `sum(f, k, lo, var + s)`: Gosper-summable bodies are closed as
/// `S(var + s) - S(lo) + f(lo)`, and the remaining sums sharing a body and
/// lower limit are brought to the smallest upper shift with the peeled
/// terms written out, so equal sums become equal subterms.
pub fn telescope_sums(e: &Expr, var: &str) -> Expr {
    let closed = close_by_gosper(e, var);
    let mut lowest: std::collections::BTreeMap<(Expr, String, Expr), i64> = std::collections::BTreeMap::new();
    collect_sum_shifts(&closed, var, &mut lowest);
    align_sums(&closed, var, &lowest)
}

/// `(body, k, lo, s)` of `sum(body, k, lo, var + s)`.
fn sum_shape(args: &[Expr], var: &str) -> Option<(Expr, String, Expr, i64)> {
    let Expr::Sym(k) = &args[1] else { return None };
    let shift = normalize(&(args[3].clone() - Expr::sym(var))).as_rat()?.to_i64()?;
    Some((args[0].clone(), k.clone(), args[2].clone(), shift))
}

fn map_children(e: &Expr, f: &mut impl FnMut(&Expr) -> Expr) -> Expr {
    if let Expr::Pow(b, x) = e {
        return Expr::pow(f(b), f(x));
    }
    let children: Vec<Expr> = e.children().iter().map(f).collect();
    match e {
        Expr::Add(_) => Expr::Add(children),
        Expr::Mul(_) => Expr::Mul(children),
        Expr::Func(g, _) => Expr::Func(*g, children),
        Expr::Unknown(n, _) => Expr::Unknown(n.clone(), children),
        other => other.clone(),
    }
}

fn close_by_gosper(e: &Expr, var: &str) -> Expr {
    let rebuilt = map_children(e, &mut |c| close_by_gosper(c, var));
    if let Expr::Func(Func::Sum, args) = &rebuilt {
        if let Some((body, k, lo, _)) = sum_shape(args, var) {
            if !body.depends_on(var) {
                if let Ok(s) = gosper(&body, &k) {
                    return s.subs(&k, &args[3]) - s.subs(&k, &lo) + body.subs(&k, &lo);
                }
            }
        }
    }
    rebuilt
}

fn collect_sum_shifts(e: &Expr, var: &str, out: &mut std::collections::BTreeMap<(Expr, String, Expr), i64>) {
    if let Expr::Pow(b, x) = e {
        collect_sum_shifts(b, var, out);
        collect_sum_shifts(x, var, out);
    }
    for c in e.children() {
        collect_sum_shifts(c, var, out);
    }
    if let Expr::Func(Func::Sum, args) = e {
        if let Some((body, k, lo, s)) = sum_shape(args, var) {
            let slot = out.entry((body, k, lo)).or_insert(s);
            *slot = (*slot).min(s);
        }
    }
}

fn align_sums(e: &Expr, var: &str, lowest: &std::collections::BTreeMap<(Expr, String, Expr), i64>) -> Expr {
    let rebuilt = map_children(e, &mut |c| align_sums(c, var, lowest));
    if let Expr::Func(Func::Sum, args) = &rebuilt {
        if let Some((body, k, lo, s)) = sum_shape(args, var) {
            let m = lowest[&(body.clone(), k.clone(), lo.clone())];
            if s > m {
                let base = Expr::Func(Func::Sum, vec![body.clone(), Expr::sym(&k), lo, Expr::sym(var) + Expr::int(m)]);
                let mut terms = vec![base];
                terms.extend((m + 1..=s).map(|i| body.subs(&k, &(Expr::sym(var) + Expr::int(i)))));
                return Expr::Add(terms);
            }
        }
    }
    rebuilt
}
