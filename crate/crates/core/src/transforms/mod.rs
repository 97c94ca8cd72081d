//! Rewrites that map non-linear, infinite-order and multivariate
//! recurrences onto solvable univariate linear ones.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::exprcore::poly::ratfunc_from_expr;
use crate::exprcore::{normalize, to_expoly, Coef, ExpPoly, Expr, Func, Rat};
use crate::linsolve::initial_symbol;
use crate::recmodel::{IcIndex, IcMap, RecurrenceSpec, Shift};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("not a power product of earlier values: {0}")]
    NotPowerProduct(String),
    #[error("constant factor {0} is not positive")]
    NonPositiveConstant(String),
    #[error("initial value {0} is not positive")]
    NonPositiveInitial(String),
    #[error("unsupported shape: {0}")]
    NotSupportedShape(String),
    #[error("coefficient vanishes at n = {0}")]
    CoefficientVanishes(i64),
    #[error("no invariant combination of the indices")]
    NoInvariantCombination,
    #[error("cannot map the solution back: {0}")]
    Inverse(String),
}

/// How a solution of the transformed recurrence maps back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inverse {
    /// `x(n) = exp(y(n))`.
    Exp,
    /// Same unknown; the closed form holds from `valid_from`, with the
    /// listed earlier values taken as given.
    Seeded { valid_from: i64, seeds: Vec<(i64, Expr)> },
    /// `x(idx) = y(t)` with `t` and the anchor symbols given in terms of the
    /// original index variables.
    Reindex { t: String, t_value: Expr, anchors: Vec<(String, Expr)> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformResult {
    pub transformed: RecurrenceSpec,
    pub inverse: Inverse,
    pub assumptions: Vec<String>,
    pub description: String,
}

impl TransformResult {
    /// Re-expresses a closed form of the transformed recurrence.
    pub fn apply_inverse(&self, y: &Expr) -> Result<Expr, TransformError> {
        match &self.inverse {
            Inverse::Exp => exp_of_log_combination(y, self.transformed.var()),
            Inverse::Seeded { .. } => Ok(y.clone()),
            Inverse::Reindex { t, t_value, anchors } => {
                let mut e = y.clone();
                // anchors first: their values mention the original variables
                let tmp = "__t";
                e = e.subs(t, &Expr::sym(tmp));
                for (a, v) in anchors {
                    e = e.subs(a, v);
                }
                Ok(normalize(&e.subs(tmp, t_value)))
            }
        }
    }
}

// ---- power products ----

/// `c·Π x(n - i)^(p_i)` as `(c, {i: p_i})`.
fn power_product(spec: &RecurrenceSpec) -> Result<(Expr, BTreeMap<i64, i64>), TransformError> {
    let rhs = &spec.rhs;
    let reject = || TransformError::NotPowerProduct(rhs.to_string());
    let factors = match rhs {
        Expr::Mul(fs) => fs.clone(),
        Expr::Add(_) => return Err(reject()),
        other => vec![other.clone()],
    };
    let n = Expr::sym(spec.var());
    let mut c = Vec::new();
    let mut powers = BTreeMap::new();
    for f in factors {
        let (base, p) = match &f {
            Expr::Pow(b, x) if b.contains_unknown() => {
                (b.as_ref().clone(), x.as_rat().and_then(|r| r.to_i64()).ok_or_else(reject)?)
            }
            other if other.contains_unknown() => (other.clone(), 1),
            other => {
                c.push(other.clone());
                continue;
            }
        };
        let Expr::Unknown(name, args) = &base else { return Err(reject()) };
        if *name != spec.unknown || args.len() != 1 {
            return Err(reject());
        }
        let d = normalize(&(n.clone() - args[0].clone())).as_rat().and_then(|r| r.to_i64()).ok_or_else(reject)?;
        if d < 1 {
            return Err(reject());
        }
        *powers.entry(d).or_insert(0) += p;
    }
    let c = normalize(&Expr::Mul(c));
    if c.depends_on(spec.var()) {
        return Err(reject());
    }
    Ok((c, powers))
}

/// `y(n) = log x(n)` turns `x(n) = c·Π x(n-i)^(p_i)` into
/// `y(n) = Σ p_i·y(n-i) + log c`.
pub fn linearize_nonlinear(spec: &RecurrenceSpec) -> Result<TransformResult, TransformError> {
    if !spec.is_univariate() {
        return Err(TransformError::NotSupportedShape("multivariate".into()));
    }
    let (c, powers) = power_product(spec)?;
    let mut assumptions = Vec::new();
    match c.as_rat() {
        Some(r) if !r.is_positive() => return Err(TransformError::NonPositiveConstant(c.to_string())),
        Some(_) => {}
        None => assumptions.push(format!("{c} > 0")),
    }
    let var = spec.var();
    let n = Expr::sym(var);
    let mut terms = vec![Expr::log(c)];
    for (d, p) in &powers {
        terms.push(Expr::int(*p) * Expr::unknown(&spec.unknown, vec![n.clone() - Expr::int(*d)]));
    }
    let mut transformed = RecurrenceSpec::new(&spec.unknown, spec.index_vars.clone(), &Expr::Add(terms), &[spec.unknown.clone()]);
    let order = powers.keys().max().copied().unwrap_or(0);
    let start = crate::verify::start_index(spec);
    let mut ics = IcMap::new();
    for k in start..start + order {
        let value = match spec.ic_at(k) {
            Some(v) => v.clone(),
            None => Expr::sym(&initial_symbol(&spec.unknown, k)),
        };
        match value.as_rat() {
            Some(r) if !r.is_positive() => {
                return Err(TransformError::NonPositiveInitial(format!("{}({k}) = {r}", spec.unknown)))
            }
            Some(_) => {}
            None => assumptions.push(format!("{value} > 0")),
        }
        ics.insert(vec![IcIndex::Int(k)], normalize(&Expr::log(value)));
    }
    transformed.initial_conditions = ics;
    Ok(TransformResult {
        transformed,
        inverse: Inverse::Exp,
        assumptions,
        description: format!("log {}({var})", spec.unknown),
    })
}

/// `exp(Σ E_u(n)·log u)` as `Π u^(E_u(n))`.
fn exp_of_log_combination(y: &Expr, var: &str) -> Result<Expr, TransformError> {
    let xp = to_expoly(y, var).map_err(|e| TransformError::Inverse(e.0))?;
    let mut by_atom: BTreeMap<Expr, ExpPoly> = BTreeMap::new();
    for t in xp.terms() {
        for (d, c) in t.coeffs.iter().enumerate() {
            for (mono, q) in c.terms() {
                let piece = ExpPoly::monomial(Coef::quad(q.clone()), d, t.base.clone());
                let slot = by_atom.entry(mono.clone()).or_insert_with(ExpPoly::zero);
                *slot = slot.try_add(&piece).map_err(|_| TransformError::Inverse("mixed fields".into()))?;
            }
        }
    }
    let mut factors = Vec::new();
    for (mono, e) in by_atom {
        let Expr::Func(Func::Log, args) = &mono else {
            return Err(TransformError::Inverse(format!("non-logarithmic part {mono}")));
        };
        factors.push(Expr::pow(args[0].clone(), e.to_expr(var)));
    }
    Ok(normalize(&Expr::Mul(factors)))
}

// ---- infinite order ----

/// `x(n) = f(n) + g(n)·Σ_{k<n} x(k)` becomes a first-order recurrence valid
/// for `n >= 2`, seeded with `x(0)` and `x(1)`.
pub fn reduce_infinite_order(spec: &RecurrenceSpec) -> Result<TransformResult, TransformError> {
    let g = spec
        .prefix_sum_coeff
        .clone()
        .ok_or_else(|| TransformError::NotSupportedShape("no prefix sum".into()))?;
    if !spec.shift_terms.is_empty() || spec.nonlinear || !spec.cross_terms.is_empty() {
        return Err(TransformError::NotSupportedShape("terms besides the prefix sum".into()));
    }
    let var = spec.var();
    let f = spec.forcing.clone();
    if let Some(rf) = ratfunc_from_expr(&g, var) {
        let bad = rf
            .num
            .rational_roots()
            .into_iter()
            .chain(rf.den.rational_roots())
            .filter(|r| r.is_integer() && *r >= Rat::one())
            .filter_map(|r| r.to_i64())
            .min();
        if let Some(k) = bad {
            return Err(TransformError::CoefficientVanishes(k));
        }
    } else {
        let xp = to_expoly(&g, var).map_err(|e| TransformError::NotSupportedShape(e.0))?;
        if xp.terms().len() != 1 || xp.terms()[0].coeffs.len() != 1 {
            return Err(TransformError::NotSupportedShape(format!("cannot rule out zeros of {g}")));
        }
    }
    let n = Expr::sym(var);
    let prev = |e: &Expr| e.subs(var, &(n.clone() - Expr::one()));
    let ratio = g.clone() / prev(&g);
    let a = simplify_rational(&(ratio.clone() + g.clone()), var);
    let b = simplify_rational(&(f.clone() - ratio * prev(&f)), var);
    let rhs = Expr::Add(vec![a * Expr::unknown(&spec.unknown, vec![n.clone() - Expr::one()]), b]);
    let mut transformed = RecurrenceSpec::new(&spec.unknown, spec.index_vars.clone(), &rhs, &[spec.unknown.clone()]);
    let at = |e: &Expr, k: i64| normalize(&e.subs(var, &Expr::int(k)));
    let x0 = spec.ic_at(0).cloned().unwrap_or_else(|| at(&f, 0));
    let x1 = spec.ic_at(1).cloned().unwrap_or_else(|| normalize(&(at(&f, 1) + at(&g, 1) * x0.clone())));
    transformed.initial_conditions.insert(vec![IcIndex::Int(1)], x1.clone());
    Ok(TransformResult {
        transformed,
        inverse: Inverse::Seeded { valid_from: 1, seeds: vec![(0, x0), (1, x1)] },
        assumptions: Vec::new(),
        description: "difference of consecutive prefix sums".into(),
    })
}

/// Collapses `e` to a single reduced fraction when it is rational in `var`.
fn simplify_rational(e: &Expr, var: &str) -> Expr {
    let e = normalize(e);
    match ratfunc_from_expr(&e, var) {
        Some(rf) => normalize(&rf.to_expr(var)),
        None => e,
    }
}

// ---- multivariate ----

fn gcd(a: i64, b: i64) -> i64 {
    num_integer::gcd(a, b)
}

/// Primitive direction shared by every shift, if they are colinear.
fn common_direction(shifts: &[Vec<i64>]) -> Option<(Vec<i64>, Vec<i64>)> {
    let first = shifts.first()?;
    let g = first.iter().fold(0, |acc, &d| gcd(acc, d));
    if g == 0 {
        return None;
    }
    let mut u: Vec<i64> = first.iter().map(|d| d / g).collect();
    let lead = *u.iter().find(|d| **d != 0)?;
    if lead < 0 {
        u.iter_mut().for_each(|d| *d = -*d);
    }
    let mut steps = Vec::new();
    for s in shifts {
        let pos = u.iter().position(|d| *d != 0)?;
        let k = s[pos] / u[pos];
        if s.iter().zip(&u).any(|(a, b)| *a != k * b) {
            return None;
        }
        steps.push(k);
    }
    Some((u, steps))
}

/// Rewrites a multivariate recurrence whose shifts all move along one
/// direction `u` with entries in {-1, 0, 1} into a univariate one in `t`.
pub fn rewrite_multivariate(spec: &RecurrenceSpec) -> Result<TransformResult, TransformError> {
    let vars = &spec.index_vars;
    if vars.len() < 2 {
        return Err(TransformError::NotSupportedShape("not multivariate".into()));
    }
    if spec.nonlinear || spec.prefix_sum_coeff.is_some() || spec.irregular.is_some() {
        return Err(TransformError::NotSupportedShape("non-linear or irregular".into()));
    }
    let shifts: Vec<Vec<i64>> = spec
        .shift_terms
        .keys()
        .map(|s| match s {
            Shift::Offset(d) => Ok(d.clone()),
            Shift::Divide(_) => Err(TransformError::NotSupportedShape("divided argument".into())),
        })
        .collect::<Result<_, _>>()?;
    let (u, steps) = common_direction(&shifts).ok_or(TransformError::NoInvariantCombination)?;
    if u.iter().any(|d| d.abs() > 1) || steps.iter().any(|k| *k < 1) {
        return Err(TransformError::NoInvariantCombination);
    }
    // the decreasing index that carries literal initial conditions
    let p = (0..vars.len())
        .filter(|&i| u[i] == 1)
        .find(|&i| {
            spec.initial_conditions.keys().any(|k| matches!(k.get(i), Some(IcIndex::Int(_))))
        })
        .or_else(|| (0..vars.len()).find(|&i| u[i] == 1))
        .ok_or(TransformError::NoInvariantCombination)?;
    let t = if vars.iter().any(|v| v == "t") { "t_".to_string() } else { "t".to_string() };
    let tv = Expr::sym(&t);
    let anchor = |q: usize| format!("{}_0", vars[q]);
    // original index q along the chain: anchor_q + u_q·t (index p is t itself)
    let along: Vec<Expr> = (0..vars.len())
        .map(|q| {
            if q == p {
                tv.clone()
            } else {
                normalize(&(Expr::sym(&anchor(q)) + Expr::int(u[q]) * tv.clone()))
            }
        })
        .collect();
    let mut rhs = vec![];
    let mut forcing = spec.forcing.clone();
    for (q, v) in vars.iter().enumerate() {
        forcing = forcing.subs(v, &Expr::sym(&format!("__v{q}")));
    }
    for (q, e) in along.iter().enumerate() {
        forcing = forcing.subs(&format!("__v{q}"), e);
    }
    rhs.push(forcing);
    for ((_, coeff), k) in spec.shift_terms.iter().zip(&steps) {
        let mut c = coeff.clone();
        for (q, v) in vars.iter().enumerate() {
            c = c.subs(v, &along[q]);
        }
        rhs.push(c * Expr::unknown(&spec.unknown, vec![tv.clone() - Expr::int(*k)]));
    }
    let mut transformed = RecurrenceSpec::new(&spec.unknown, vec![t.clone()], &Expr::Add(rhs), &[spec.unknown.clone()]);
    for (pattern, value) in &spec.initial_conditions {
        let Some(IcIndex::Int(tp)) = pattern.get(p) else {
            return Err(TransformError::NotSupportedShape("boundary condition on a non-decreasing index".into()));
        };
        let mut v = value.clone();
        for (q, c) in pattern.iter().enumerate() {
            if q == p {
                continue;
            }
            let IcIndex::Var(name) = c else {
                return Err(TransformError::NotSupportedShape("literal boundary on a free index".into()));
            };
            let at = normalize(&(Expr::sym(&anchor(q)) + Expr::int(u[q] * tp)));
            v = v.subs(name, &at);
        }
        transformed.initial_conditions.insert(vec![IcIndex::Int(*tp)], normalize(&v));
    }
    let anchors: Vec<(String, Expr)> = (0..vars.len())
        .filter(|&q| q != p)
        .map(|q| (anchor(q), normalize(&(Expr::sym(&vars[q]) - Expr::int(u[q]) * Expr::sym(&vars[p])))))
        .collect();
    let invariant: Vec<String> = anchors.iter().map(|(a, e)| format!("{a} = {e}")).collect();
    Ok(TransformResult {
        transformed,
        inverse: Inverse::Reindex { t: t.clone(), t_value: Expr::sym(&vars[p]), anchors },
        assumptions: Vec::new(),
        description: format!("{t} = {}, {}", vars[p], invariant.join(", ")),
    })
}
