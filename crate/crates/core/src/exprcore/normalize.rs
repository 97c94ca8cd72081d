//! Canonical form for expression trees.
//!
//! Rules applied bottom-up:
//! - constant folding, additive and multiplicative identities;
//! - flattening of nested sums and products, children sorted by `Expr`'s order;
//! - like-term collection in sums, exponent collection in products;
//! - products distributed over sums, positive integer powers of sums expanded;
//! - exponent laws for literal rational bases: `b^(k + e) = b^k * b^e`,
//!   `b^(k*e) = (b^k)^e`, `a^e * b^e = (a*b)^e`; a rational coefficient that is
//!   an integer power of the single literal-base power in a term is folded
//!   back into the exponent, so `2^n*2` becomes `2^(n + 1)`;
//! - `factorial(a)/factorial(b)` with `a - b` a literal integer is expanded
//!   into a product of linear factors;
//! - `binomial(a, k)` for literal `k` becomes a falling factorial over `k!`;
//! - `sum`/`prod` with literal integer bounds are expanded.
//!
//! Anything else passes through unchanged.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::eval::factor_int;
use super::expr::{Expr, Func};
use super::rat::{square_split, Rat};

/// Largest bit size produced by constant folding of powers; bigger powers
/// stay symbolic.
const MAX_FOLD_BITS: u64 = 1 << 16;
const MAX_EXPAND_POW: i64 = 32;
const MAX_LITERAL_RANGE: i64 = 512;
const MAX_FACTORIAL_FOLD: i64 = 512;

impl Expr {
    pub fn normalize(&self) -> Expr {
        normalize(self)
    }
}

pub fn normalize(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Sym(_) => e.clone(),
        Expr::Unknown(name, args) => Expr::Unknown(name.clone(), args.iter().map(normalize).collect()),
        Expr::Func(f, args) => norm_func(*f, args.iter().map(normalize).collect()),
        Expr::Pow(b, x) => norm_pow(normalize(b), normalize(x)),
        Expr::Mul(fs) => norm_mul(fs.iter().map(normalize).collect()),
        Expr::Add(ts) => norm_add(ts.iter().map(normalize).collect()),
    }
}

fn rat_pow_guarded(b: &Rat, k: &BigInt) -> Option<Rat> {
    let k = k.to_i64()?;
    if b.is_zero() {
        return (k > 0).then(Rat::zero).or((k == 0).then(Rat::one));
    }
    let bits = b.numer().bits().max(b.denom().bits()).max(1);
    if (k.unsigned_abs()).saturating_mul(bits) > MAX_FOLD_BITS {
        return None;
    }
    Some(b.pow(k))
}

/// Splits a normalized sum into its constant part and the rest.
fn split_const_term(e: &Expr) -> (Rat, Option<Expr>) {
    match e {
        Expr::Const(c) => (c.clone(), None),
        Expr::Add(ts) => match ts.first() {
            Some(Expr::Const(c)) => {
                let rest: Vec<Expr> = ts[1..].to_vec();
                let rest = if rest.len() == 1 { rest.into_iter().next().unwrap() } else { Expr::Add(rest) };
                (c.clone(), Some(rest))
            }
            _ => (Rat::zero(), Some(e.clone())),
        },
        _ => (Rat::zero(), Some(e.clone())),
    }
}

/// `B^(j + e)` with literal base and integer `j` is the folded form of
/// `B^j * B^e`; returns `(B^j, B^e)`.
fn unfold_power(f: &Expr) -> Option<(Rat, Expr)> {
    if let Expr::Pow(b, x) = f {
        if let Expr::Const(base) = &**b {
            if let Expr::Add(_) = &**x {
                let (c, rest) = split_const_term(x);
                let rest = rest?;
                let j = c.to_bigint()?;
                if j.is_positive() || j.is_negative() {
                    let coeff = rat_pow_guarded(base, &j)?;
                    return Some((coeff, Expr::pow(Expr::Const(base.clone()), rest)));
                }
            }
        }
    }
    None
}

fn norm_func(f: Func, args: Vec<Expr>) -> Expr {
    match f {
        Func::Log => {
            if args.len() == 1 && args[0].is_one() {
                return Expr::zero();
            }
            if let Some(r) = args.first().and_then(|a| a.as_rat()).filter(|r| r.is_positive()) {
                return split_log(r);
            }
            Expr::Func(f, args)
        }
        Func::Factorial => {
            if let Some(k) = args.first().and_then(|a| a.as_rat()).and_then(|r| r.to_i64()) {
                if (0..=MAX_FACTORIAL_FOLD).contains(&k) {
                    let v: Rat = (1..=k).map(Rat::from).product();
                    return Expr::Const(v);
                }
            }
            Expr::Func(f, args)
        }
        Func::Binomial => {
            if args.len() == 2 {
                if let Some(k) = args[1].as_rat().and_then(|r| r.to_i64()) {
                    if (0..=MAX_EXPAND_POW).contains(&k) {
                        let mut factors: Vec<Expr> = (0..k)
                            .map(|i| Expr::Add(vec![args[0].clone(), Expr::int(-i)]))
                            .collect();
                        let kf: Rat = (1..=k).map(Rat::from).product();
                        factors.push(Expr::Const(kf.recip()));
                        return normalize(&Expr::Mul(factors));
                    }
                }
            }
            Expr::Func(f, args)
        }
        Func::Sum | Func::Prod => {
            if args.len() == 4 {
                if let (Expr::Sym(k), Some(lo), Some(hi)) = (
                    &args[1],
                    args[2].as_rat().and_then(|r| r.to_i64()),
                    args[3].as_rat().and_then(|r| r.to_i64()),
                ) {
                    if hi - lo < MAX_LITERAL_RANGE {
                        let items: Vec<Expr> =
                            (lo..=hi).map(|i| args[0].subs(k, &Expr::int(i))).collect();
                        let e = if f == Func::Sum { Expr::Add(items) } else { Expr::Mul(items) };
                        return normalize(&e);
                    }
                }
            }
            Expr::Func(f, args)
        }
    }
}

/// `log(r)` as an integer combination of logs of coprime factors.
fn split_log(r: &Rat) -> Expr {
    let mut terms = Vec::new();
    for (sign, part) in [(1, r.numer()), (-1, r.denom())] {
        for (p, e) in factor_int(part) {
            terms.push(Expr::Mul(vec![
                Expr::int(sign * e as i64),
                Expr::Func(Func::Log, vec![Expr::Const(Rat::from_int(p))]),
            ]));
        }
    }
    if terms.len() == 1 {
        if let Expr::Mul(fs) = &terms[0] {
            if fs[0].is_one() {
                return fs[1].clone();
            }
        }
    }
    normalize(&Expr::Add(terms))
}

pub(crate) fn norm_pow(b: Expr, x: Expr) -> Expr {
    if x.is_zero() || b.is_one() {
        return Expr::one();
    }
    if x.is_one() {
        return b;
    }
    match (&b, &x) {
        (Expr::Const(base), Expr::Const(exp)) => pow_const_const(base, exp),
        (Expr::Const(base), _) => pow_const_sym(base, x),
        (Expr::Pow(inner_b, inner_x), _) => {
            let merge = x.as_rat().is_some_and(|r| r.is_integer())
                || matches!(&**inner_b, Expr::Const(c) if c.is_positive());
            if merge {
                let e = norm_mul(vec![(**inner_x).clone(), x.clone()]);
                norm_pow((**inner_b).clone(), e)
            } else {
                Expr::pow(b, x)
            }
        }
        (Expr::Mul(fs), Expr::Const(k)) if k.is_integer() => {
            norm_mul(fs.iter().map(|f| norm_pow(f.clone(), x.clone())).collect())
        }
        (Expr::Add(_), Expr::Const(k)) if k.is_integer() && k.is_positive() => {
            match k.to_i64() {
                Some(k) if k <= MAX_EXPAND_POW => {
                    let mut acc = b.clone();
                    for _ in 1..k {
                        acc = norm_mul(vec![acc, b.clone()]);
                    }
                    acc
                }
                _ => Expr::pow(b, x),
            }
        }
        _ => Expr::pow(b, x),
    }
}

fn pow_const_const(base: &Rat, exp: &Rat) -> Expr {
    let keep = || Expr::pow(Expr::Const(base.clone()), Expr::Const(exp.clone()));
    if base.is_zero() {
        return if exp.is_positive() { Expr::zero() } else { keep() };
    }
    if let Some(k) = exp.to_bigint() {
        return rat_pow_guarded(base, &k).map(Expr::Const).unwrap_or_else(keep);
    }
    let q = match exp.denom().to_u32() {
        Some(q) => q,
        None => return keep(),
    };
    if let Some(root) = base.nth_root_exact(q) {
        return rat_pow_guarded(&root, exp.numer()).map(Expr::Const).unwrap_or_else(keep);
    }
    if base.is_negative() {
        return keep();
    }
    // integer part of the exponent moves into the coefficient
    let fl = exp.floor();
    let frac = exp - &Rat::from_int(fl.clone());
    if !fl.is_zero() {
        let Some(c) = rat_pow_guarded(base, &fl) else { return keep() };
        return norm_mul(vec![Expr::Const(c), pow_const_const(base, &frac)]);
    }
    if frac == Rat::new(1, 2) {
        // sqrt(p/q) = s*sqrt(m)/q with m squarefree
        let pq = base.numer() * base.denom();
        let (s, m) = square_split(&pq);
        let coeff = Rat::new(s, base.denom().clone());
        let m = Rat::from_int(m);
        if coeff.is_one() {
            return Expr::pow(Expr::Const(m), Expr::Const(frac));
        }
        return norm_mul(vec![Expr::Const(coeff), Expr::pow(Expr::Const(m), Expr::Const(frac))]);
    }
    keep()
}

fn pow_const_sym(base: &Rat, x: Expr) -> Expr {
    let keep = |x: Expr| Expr::pow(Expr::Const(base.clone()), x);
    // b^(k + e) = b^k * b^e
    if let (c, Some(rest)) = split_const_term(&x) {
        if let Some(k) = c.to_bigint() {
            if !k.is_zero() && !base.is_zero() {
                if let Some(ck) = rat_pow_guarded(base, &k) {
                    return norm_mul(vec![Expr::Const(ck), norm_pow(Expr::Const(base.clone()), rest)]);
                }
            }
        }
    }
    // b^(k*e) = (b^k)^e
    if let Expr::Mul(fs) = &x {
        if let Some(Expr::Const(k)) = fs.first() {
            let rest: Vec<Expr> = fs[1..].to_vec();
            let rest = if rest.len() == 1 { rest.into_iter().next().unwrap() } else { Expr::Mul(rest) };
            let new_base = if let Some(ki) = k.to_bigint() {
                rat_pow_guarded(base, &ki)
            } else {
                k.denom()
                    .to_u32()
                    .and_then(|q| base.nth_root_exact(q))
                    .and_then(|r| rat_pow_guarded(&r, k.numer()))
            };
            if let Some(nb) = new_base {
                return norm_pow(Expr::Const(nb), rest);
            }
        }
    }
    keep(x)
}

/// Coefficient and monomial of a normalized term, with folded literal-base
/// powers unfolded.
fn split_coeff(t: &Expr) -> (Rat, Option<Expr>) {
    match t {
        Expr::Const(c) => (c.clone(), None),
        Expr::Mul(fs) => {
            let mut coeff = Rat::one();
            let mut rest = Vec::with_capacity(fs.len());
            for f in fs {
                match f {
                    Expr::Const(c) => coeff *= c,
                    _ => match unfold_power(f) {
                        Some((c, g)) => {
                            coeff *= &c;
                            rest.push(g);
                        }
                        None => rest.push(f.clone()),
                    },
                }
            }
            rest.sort();
            let m = if rest.len() == 1 { rest.pop().unwrap() } else { Expr::Mul(rest) };
            (coeff, Some(m))
        }
        _ => match unfold_power(t) {
            Some((c, g)) => (c, Some(g)),
            None => (Rat::one(), Some(t.clone())),
        },
    }
}

pub(crate) fn norm_add(terms: Vec<Expr>) -> Expr {
    let mut constant = Rat::zero();
    let mut collected: BTreeMap<Expr, Rat> = BTreeMap::new();
    let mut stack = terms;
    while let Some(t) = stack.pop() {
        if let Expr::Add(ts) = t {
            stack.extend(ts);
            continue;
        }
        match split_coeff(&t) {
            (c, None) => constant += &c,
            (c, Some(m)) => {
                let entry = collected.entry(m).or_insert_with(Rat::zero);
                *entry += &c;
            }
        }
    }
    let mut out: Vec<Expr> = Vec::new();
    for (m, c) in collected {
        if c.is_zero() {
            continue;
        }
        let term = if c.is_one() {
            m
        } else {
            norm_mul(vec![Expr::Const(c), m])
        };
        match term {
            Expr::Const(c) => constant += &c,
            Expr::Add(ts) => out.extend(ts),
            t => out.push(t),
        }
    }
    if !constant.is_zero() {
        out.push(Expr::Const(constant));
    }
    out.sort();
    match out.len() {
        0 => Expr::zero(),
        1 => out.pop().unwrap(),
        _ => Expr::Add(out),
    }
}

fn flatten_mul(work: Vec<Expr>, coeff: &mut Rat, out: &mut Vec<Expr>) {
    let mut stack = work;
    while let Some(f) = stack.pop() {
        match f {
            Expr::Mul(fs) => stack.extend(fs),
            Expr::Const(c) => *coeff *= &c,
            other => match unfold_power(&other) {
                Some((c, g)) => {
                    *coeff *= &c;
                    out.push(g);
                }
                None => out.push(other),
            },
        }
    }
}

/// Groups factors by base, summing exponents; literal bases with equal
/// exponents are multiplied together. Returns the new factor list and whether
/// a re-flatten is needed.
fn collect_factors(factors: Vec<Expr>) -> (Vec<Expr>, bool) {
    let mut by_base: BTreeMap<Expr, Vec<Expr>> = BTreeMap::new();
    let mut lit_by_exp: BTreeMap<Expr, Rat> = BTreeMap::new();
    let mut lit_count: BTreeMap<Expr, usize> = BTreeMap::new();
    for f in factors {
        let (b, x) = match f {
            Expr::Pow(b, x) => (*b, *x),
            other => (other, Expr::one()),
        };
        if let Expr::Const(c) = &b {
            let entry = lit_by_exp.entry(x.clone()).or_insert_with(Rat::one);
            *entry *= c;
            *lit_count.entry(x).or_insert(0) += 1;
        } else {
            by_base.entry(b).or_default().push(x);
        }
    }
    let mut out = Vec::new();
    let mut again = false;
    for (b, xs) in by_base {
        let single = xs.len() == 1;
        let x = if single { xs.into_iter().next().unwrap() } else { norm_add(xs) };
        let p = if single && !x.is_zero() && !x.is_one() {
            Expr::pow(b, x)
        } else {
            norm_pow(b, x)
        };
        again |= !single && matches!(p, Expr::Mul(_) | Expr::Const(_) | Expr::Add(_));
        out.push(p);
    }
    for (x, base) in lit_by_exp {
        let count = lit_count[&x];
        let p = if count == 1 {
            Expr::pow(Expr::Const(base), x)
        } else {
            norm_pow(Expr::Const(base), x)
        };
        again |= count > 1 && matches!(p, Expr::Mul(_) | Expr::Const(_) | Expr::Add(_));
        out.push(p);
    }
    (out, again)
}

/// `factorial(b + j)` with literal integer `j > 0` becomes
/// `factorial(b) * (b + 1) * ... * (b + j)` whenever factorials of arguments
/// differing by integers appear with opposite exponent signs.
fn expand_factorial_ratios(factors: &mut Vec<Expr>) -> bool {
    // (argument, exponent) of each factorial factor
    let mut facts: Vec<(usize, Expr, Rat, Expr, Rat)> = Vec::new();
    for (i, f) in factors.iter().enumerate() {
        let (arg, exp) = match f {
            Expr::Func(Func::Factorial, a) => (&a[0], Rat::one()),
            Expr::Pow(b, x) => match (&**b, x.as_rat()) {
                (Expr::Func(Func::Factorial, a), Some(k)) if k.is_integer() => (&a[0], k.clone()),
                _ => continue,
            },
            _ => continue,
        };
        let (c, rest) = split_const_term(arg);
        let Some(rest) = rest else { continue };
        if !c.is_integer() {
            continue;
        }
        facts.push((i, arg.clone(), exp, rest, c));
    }
    let mut groups: BTreeMap<Expr, Vec<usize>> = BTreeMap::new();
    for (idx, f) in facts.iter().enumerate() {
        groups.entry(f.3.clone()).or_default().push(idx);
    }
    let mut changed = false;
    let mut remove = Vec::new();
    let mut add = Vec::new();
    for (_, members) in groups {
        let has_pos = members.iter().any(|&m| facts[m].2.is_positive());
        let has_neg = members.iter().any(|&m| facts[m].2.is_negative());
        if !(has_pos && has_neg) {
            continue;
        }
        let min_off = members.iter().map(|&m| facts[m].4.clone()).min().unwrap();
        let span_ok = members
            .iter()
            .all(|&m| (&facts[m].4 - &min_off).to_i64().is_some_and(|d| d <= MAX_EXPAND_POW));
        if !span_ok {
            continue;
        }
        let base_arg = facts[members.iter().copied().find(|&m| facts[m].4 == min_off).unwrap()]
            .1
            .clone();
        for &m in &members {
            let (i, _, exp, rest, off) = &facts[m];
            let d = (off - &min_off).to_i64().unwrap();
            if d == 0 {
                continue;
            }
            changed = true;
            remove.push(*i);
            // factor by factor, so the product is not folded back
            add.push(Expr::pow(Expr::factorial(base_arg.clone()), Expr::Const(exp.clone())));
            for j in 1..=d {
                let step = norm_add(vec![rest.clone(), Expr::Const(&min_off + &Rat::from(j))]);
                add.push(Expr::pow(step, Expr::Const(exp.clone())));
            }
        }
    }
    if changed {
        remove.sort_unstable();
        for i in remove.into_iter().rev() {
            factors.remove(i);
        }
        factors.extend(add.into_iter().map(|e| normalize(&e)));
    }
    changed
}

pub(crate) fn norm_mul(factors: Vec<Expr>) -> Expr {
    let mut coeff = Rat::one();
    let mut current: Vec<Expr> = Vec::new();
    flatten_mul(factors, &mut coeff, &mut current);
    for _ in 0..16 {
        if coeff.is_zero() {
            return Expr::zero();
        }
        if current.iter().any(|f| matches!(f, Expr::Add(_))) {
            return distribute(coeff, current);
        }
        let (collected, again) = collect_factors(std::mem::take(&mut current));
        let mut next = Vec::new();
        flatten_mul(collected, &mut coeff, &mut next);
        let fact_changed = expand_factorial_ratios(&mut next);
        current = next;
        if !again && !fact_changed {
            break;
        }
        let mut refl = Vec::new();
        flatten_mul(std::mem::take(&mut current), &mut coeff, &mut refl);
        current = refl;
    }
    if coeff.is_zero() {
        return Expr::zero();
    }
    if current.iter().any(|f| matches!(f, Expr::Add(_))) {
        return distribute(coeff, current);
    }
    current.retain(|f| !f.is_one());
    absorb_into_factorials(&mut current);
    current.sort();
    fold_coefficient(&mut coeff, &mut current);
    build_product(coeff, current)
}

/// `factorial(a) * (a + 1)` becomes `factorial(a + 1)` when no factorial
/// appears in a denominator.
fn absorb_into_factorials(factors: &mut Vec<Expr>) {
    let in_denominator = factors.iter().any(|f| {
        matches!(f, Expr::Pow(b, x) if matches!(**b, Expr::Func(Func::Factorial, _)) && x.as_rat().is_some_and(Rat::is_negative))
    });
    if in_denominator {
        return;
    }
    'outer: loop {
        for i in 0..factors.len() {
            let Expr::Func(Func::Factorial, a) = &factors[i] else { continue };
            let next = norm_add(vec![a[0].clone(), Expr::one()]);
            for j in 0..factors.len() {
                let reduced = match &factors[j] {
                    f if *f == next => Some(None),
                    Expr::Pow(b, x) if **b == next => match x.as_rat().and_then(Rat::to_i64) {
                        Some(2) => Some(Some(next.clone())),
                        Some(k) if k > 2 => Some(Some(Expr::powi(next.clone(), k - 1))),
                        _ => None,
                    },
                    _ => None,
                };
                let Some(rest) = reduced else { continue };
                factors[i] = Expr::factorial(next.clone());
                match rest {
                    Some(r) => factors[j] = r,
                    None => {
                        factors.remove(j);
                    }
                }
                continue 'outer;
            }
        }
        return;
    }
}

fn distribute(coeff: Rat, mut factors: Vec<Expr>) -> Expr {
    let pos = factors.iter().position(|f| matches!(f, Expr::Add(_))).unwrap();
    let Expr::Add(terms) = factors.remove(pos) else { unreachable!() };
    factors.push(Expr::Const(coeff));
    let expanded: Vec<Expr> = terms
        .into_iter()
        .map(|t| {
            let mut fs = factors.clone();
            fs.push(t);
            norm_mul(fs)
        })
        .collect();
    norm_add(expanded)
}

/// `c * B^e` with `c = ±B^j` becomes `±B^(j + e)` when `B^e` is the only
/// literal-base power in the product and `e` has no constant part.
fn fold_coefficient(coeff: &mut Rat, factors: &mut [Expr]) {
    if coeff.is_one() || (-&*coeff).is_one() {
        return;
    }
    let lit: Vec<usize> = factors
        .iter()
        .enumerate()
        .filter(|(_, f)| matches!(f, Expr::Pow(b, x) if matches!(**b, Expr::Const(_)) && x.as_rat().is_none()))
        .map(|(i, _)| i)
        .collect();
    if lit.len() != 1 {
        return;
    }
    let Expr::Pow(b, x) = &factors[lit[0]] else { return };
    let Expr::Const(base) = &**b else { return };
    if split_const_term(x).0 != Rat::zero() {
        return;
    }
    let (j, sign) = if let Some(j) = coeff.log_exact(base) {
        (j, Rat::one())
    } else if let Some(j) = (-&*coeff).log_exact(base) {
        (j, -Rat::one())
    } else {
        return;
    };
    if j == 0 {
        return;
    }
    let new_exp = norm_add(vec![Expr::int(j), (**x).clone()]);
    factors[lit[0]] = Expr::pow(Expr::Const(base.clone()), new_exp);
    *coeff = sign;
}

fn build_product(coeff: Rat, mut factors: Vec<Expr>) -> Expr {
    if factors.is_empty() {
        return Expr::Const(coeff);
    }
    if coeff.is_one() {
        if factors.len() == 1 {
            return factors.pop().unwrap();
        }
        return Expr::Mul(factors);
    }
    let mut out = Vec::with_capacity(factors.len() + 1);
    out.push(Expr::Const(coeff));
    out.extend(factors);
    Expr::Mul(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n() -> Expr {
        Expr::sym("n")
    }

    #[test]
    fn exponent_law_folds_coefficient() {
        let e = Expr::Mul(vec![Expr::pow(Expr::int(2), n()), Expr::int(2)]).normalize();
        assert_eq!(e, Expr::pow(Expr::int(2), Expr::Add(vec![Expr::int(1), n()])));
        assert_eq!(e.to_string(), "2^(n + 1)");
    }

    #[test]
    fn additive_identity() {
        assert_eq!((n() + Expr::zero()).normalize(), n());
    }

    #[test]
    fn like_powers_collect() {
        let two_n = Expr::pow(Expr::int(2), n());
        let e = (two_n.clone() + two_n.clone() - Expr::pow(Expr::int(2), n() + Expr::one())).normalize();
        assert_eq!(e, Expr::zero());
        let e = (two_n.clone() * Expr::pow(Expr::int(4), n())).normalize();
        assert_eq!(e, Expr::pow(Expr::int(8), n()));
        let e = Expr::pow(Expr::int(2), Expr::Mul(vec![Expr::int(2), n()])).normalize();
        assert_eq!(e, Expr::pow(Expr::int(4), n()));
    }

    #[test]
    fn expands_squares() {
        let sq = Expr::powi(n() - Expr::one(), 2);
        let e = (Expr::int(5) * sq).normalize();
        let expanded = (Expr::int(5) * Expr::powi(n(), 2) - Expr::int(10) * n() + Expr::int(5)).normalize();
        assert_eq!(e, expanded);
    }

    #[test]
    fn surds_multiply_out() {
        let r5 = Expr::pow(Expr::int(5), Expr::frac(1, 2));
        assert_eq!((r5.clone() * r5.clone()).normalize(), Expr::int(5));
        let r8 = Expr::pow(Expr::int(8), Expr::frac(1, 2)).normalize();
        assert_eq!(r8.to_string(), "2*2^(1/2)");
    }

    #[test]
    fn factorial_ratio() {
        let e = (Expr::factorial(n()) / Expr::factorial(n() - Expr::int(2))).normalize();
        let expected = (n() * (n() - Expr::one())).normalize();
        assert_eq!(e, expected);
        let b = Expr::func(Func::Binomial, vec![n(), Expr::int(2)]).normalize();
        assert_eq!(b, (Expr::frac(1, 2) * n() * (n() - Expr::one())).normalize());
    }

    #[test]
    fn literal_sums_expand() {
        let s = Expr::func(
            Func::Sum,
            vec![Expr::sym("k"), Expr::sym("k"), Expr::int(1), Expr::int(4)],
        );
        assert_eq!(s.normalize(), Expr::int(10));
        let empty = Expr::func(
            Func::Prod,
            vec![Expr::sym("k"), Expr::sym("k"), Expr::int(3), Expr::int(2)],
        );
        assert_eq!(empty.normalize(), Expr::one());
    }

    #[test]
    fn idempotent_on_samples() {
        let samples = vec![
            Expr::pow(Expr::int(3), Expr::pow(Expr::int(2), n()) - Expr::one()),
            Expr::Mul(vec![Expr::int(4), Expr::pow(Expr::int(-2), n())]),
            Expr::Mul(vec![Expr::frac(8, 3), Expr::pow(Expr::int(2), n())]) + n() - Expr::one(),
            Expr::Mul(vec![Expr::int(6), Expr::pow(Expr::int(7), n() + Expr::int(2))]),
        ];
        for s in samples {
            let once = s.normalize();
            assert_eq!(once.normalize(), once, "not idempotent on {s}");
        }
    }
}
