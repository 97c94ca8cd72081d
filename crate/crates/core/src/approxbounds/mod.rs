//! Sandwich bounds `f(n) - g₋(n) <= x(n) <= f(n) + g₊(n)` for linear
//! constant-coefficient recurrences with non-negative coefficients.

use thiserror::Error;

use crate::exprcore::{normalize, Coef, ExpPoly, Expr, Rat};
use crate::linsolve::{char_decompose_coeffs, char_poly, particular_solution, solve_const_coeff, ConstCoeffRec, LinError};
use crate::recmodel::{RecurrenceSpec, Solution};
use crate::verify::start_index;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApproxError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("the characteristic polynomial has no positive root")]
    NoPositiveRoot,
    #[error("missing initial condition {0}")]
    MissingInitialCondition(String),
}

impl From<LinError> for ApproxError {
    fn from(e: LinError) -> Self {
        ApproxError::Unsupported(e.to_string())
    }
}

/// `c·n^d·α^n`; `c` and `α` are given by enclosures, and a missing `c`
/// depends on the initial values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundTerm {
    pub c: Option<(Rat, Rat)>,
    pub d: u32,
    pub alpha: (Rat, Rat),
}

impl BoundTerm {
    fn exact(c: Rat, d: u32, alpha: Rat) -> BoundTerm {
        BoundTerm { c: Some((c.clone(), c)), d, alpha: (alpha.clone(), alpha) }
    }

    /// Upper end of the term as an expression.
    pub fn to_expr(&self, var: &str) -> Expr {
        let c = self.c.as_ref().map_or_else(|| Expr::sym("c"), |(_, hi)| Expr::rat(hi.clone()));
        let n = Expr::sym(var);
        normalize(&Expr::Mul(vec![c, Expr::powi(n.clone(), self.d as i64), Expr::pow(Expr::rat(self.alpha.1.clone()), n)]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SandwichBounds {
    /// Exact leading part.
    pub f: ExpPoly,
    pub g_minus: BoundTerm,
    pub g_plus: BoundTerm,
    /// Largest initial value.
    pub init_bound: Rat,
    pub lambda: Rat,
}

impl SandwichBounds {
    pub fn lower(&self, var: &str) -> Expr {
        normalize(&(self.f.to_expr(var) - self.g_minus.to_expr(var)))
    }

    pub fn upper(&self, var: &str) -> Expr {
        normalize(&(self.f.to_expr(var) + self.g_plus.to_expr(var)))
    }
}

fn checked_rec(spec: &RecurrenceSpec) -> Result<ConstCoeffRec, ApproxError> {
    if !spec.is_univariate() || spec.divisor().is_some() {
        return Err(ApproxError::Unsupported("not a univariate shift recurrence".into()));
    }
    let rec = ConstCoeffRec::from_spec(spec)?;
    if rec.coeffs.iter().any(|a| a.is_negative()) {
        return Err(ApproxError::Unsupported("negative coefficient".into()));
    }
    if rec.coeffs.iter().all(|a| a.is_zero()) {
        return Err(ApproxError::NoPositiveRoot);
    }
    if !rec.forcing.is_numeric() || rec.forcing.terms().iter().any(|t| !t.base.as_rat().is_some_and(|b| b.is_positive())) {
        return Err(ApproxError::Unsupported("forcing must be numeric with positive rational bases".into()));
    }
    Ok(rec)
}

/// `Σ a_i·λ^(-i) <= 1`, so `λ` dominates every positive characteristic root.
pub fn lambda_is_sound(coeffs: &[Rat], lambda: &Rat) -> bool {
    if !lambda.is_positive() {
        return false;
    }
    let mut s = Rat::zero();
    for (i, a) in coeffs.iter().enumerate() {
        s = s + a / lambda.pow(i as i64 + 1);
    }
    s <= Rat::one()
}

/// Enclosure of the dominant positive characteristic root.
pub fn dominant_root(coeffs: &[Rat], width: &Rat) -> Result<(Rat, Rat), ApproxError> {
    let p = char_poly(coeffs);
    let iv = p.isolate_positive_root(width).map_err(|_| ApproxError::NoPositiveRoot)?;
    Ok((iv.lo, iv.hi))
}

/// A rational `λ` above the dominant root, widened until it is sound.
pub fn default_lambda(coeffs: &[Rat], width: &Rat) -> Result<Rat, ApproxError> {
    let (_, mut hi) = dominant_root(coeffs, width)?;
    while !lambda_is_sound(coeffs, &hi) {
        hi = hi * Rat::new(1001, 1000);
    }
    Ok(hi)
}

/// Top term `(c, d, base)` of an exponential polynomial with rational bases.
fn top_term(xp: &ExpPoly) -> Option<(Rat, u32, Rat)> {
    let t = xp.terms().iter().filter(|t| !t.coeffs.iter().all(Coef::is_zero)).max_by(|a, b| a.base.total_cmp(&b.base))?;
    let d = (0..t.coeffs.len()).rev().find(|&d| !t.coeffs[d].is_zero())?;
    Some((t.coeff(d).as_rat()?, d as u32, t.base.as_rat()?.clone()))
}

/// Dominant term of the solution: the particular solution's top term or the
/// homogeneous growth `λ^n`, whichever base is larger.
pub fn leading_term(spec: &RecurrenceSpec) -> Result<BoundTerm, ApproxError> {
    let rec = checked_rec(spec)?;
    let decomp = char_decompose_coeffs(&rec.coeffs);
    let part = particular_solution(&decomp, &rec.forcing)?;
    let p = char_poly(&rec.coeffs);
    let homogeneous = |lo: Rat, hi: Rat| -> BoundTerm {
        let c = solve_const_coeff(spec)
            .ok()
            .and_then(|sol| top_term(&sol.closed))
            .filter(|(_, _, b)| *b == hi)
            .map(|(c, _, _)| (c.clone(), c));
        BoundTerm { c, d: 0, alpha: (lo, hi) }
    };
    let mut width = default_width();
    loop {
        let (lo, hi) = dominant_root(&rec.coeffs, &width)?;
        let Some((c, d, b)) = top_term(&part) else {
            return Ok(homogeneous(lo, hi));
        };
        if b > hi || (lo == hi && b == hi) {
            // a resonant forcing base already carries the extra power of n
            return Ok(BoundTerm::exact(c, d, b));
        }
        if b < lo || (lo == hi && b < hi) {
            return Ok(homogeneous(lo, hi));
        }
        // an irrational root is never a rational forcing base
        debug_assert!(!p.eval(&b).is_zero() || lo == hi);
        width = width / Rat::from(16);
    }
}

/// The sandwich for the given `λ`, which must satisfy [`lambda_is_sound`].
pub fn expoly_sandwich_with(spec: &RecurrenceSpec, lambda: &Rat) -> Result<SandwichBounds, ApproxError> {
    let rec = checked_rec(spec)?;
    if !lambda_is_sound(&rec.coeffs, lambda) {
        return Err(ApproxError::Unsupported(format!("λ = {lambda} is below a characteristic root")));
    }
    let start = start_index(spec);
    let order = rec.order() as i64;
    let mut values = Vec::new();
    for k in start..start + order {
        let v = spec
            .ic_at(k)
            .and_then(|e| e.as_rat().cloned())
            .ok_or_else(|| ApproxError::MissingInitialCondition(format!("{}({k})", spec.unknown)))?;
        if v.is_negative() {
            return Err(ApproxError::Unsupported(format!("negative initial value {}({k})", spec.unknown)));
        }
        values.push(v);
    }
    let init_bound = values.iter().max().cloned().unwrap_or_else(Rat::zero);
    let exact = solve_const_coeff(spec).ok().map(|s| s.closed).filter(is_rational);
    let f = match exact {
        Some(closed) => closed,
        None => particular_solution(&char_decompose_coeffs(&rec.coeffs), &rec.forcing)?,
    };
    // the remainder x - f is homogeneous, so its ratio to λ^n at the start
    // block bounds it by induction
    let mut h_plus = Rat::zero();
    let mut h_minus = Rat::zero();
    for (i, v) in values.iter().enumerate() {
        let k = start + i as i64;
        let fk = f.value_coef(k).as_rat().expect("rational exponential polynomial");
        let r = (v - fk) / lambda.pow(k);
        if r > h_plus {
            h_plus = r.clone();
        }
        if -r.clone() > h_minus {
            h_minus = -r;
        }
    }
    Ok(SandwichBounds {
        f,
        g_minus: BoundTerm::exact(h_minus, 0, lambda.clone()),
        g_plus: BoundTerm::exact(h_plus, 0, lambda.clone()),
        init_bound,
        lambda: lambda.clone(),
    })
}

fn is_rational(xp: &ExpPoly) -> bool {
    xp.terms().iter().all(|t| t.base.is_rational() && t.coeffs.iter().all(|c| c.as_rat().is_some()))
}

/// Default enclosure width for the dominant root.
pub fn default_width() -> Rat {
    Rat::new(1, 1000)
}

pub fn expoly_sandwich(spec: &RecurrenceSpec) -> Result<SandwichBounds, ApproxError> {
    expoly_sandwich_width(spec, &default_width())
}

pub fn expoly_sandwich_width(spec: &RecurrenceSpec, width: &Rat) -> Result<SandwichBounds, ApproxError> {
    let rec = checked_rec(spec)?;
    expoly_sandwich_with(spec, &default_lambda(&rec.coeffs, width)?)
}

/// The sandwich as a `Bounds` solution.
pub fn approx_bounds(spec: &RecurrenceSpec, width: &Rat) -> Result<Solution, ApproxError> {
    let sb = expoly_sandwich_width(spec, width)?;
    let var = spec.var();
    let domain = format!("{var} >= {}", start_index(spec));
    Ok(Solution::bounds(sb.lower(var), sb.upper(var), domain).with_assumptions(vec![
        "non-negative coefficients and initial values".into(),
        format!("λ = {} bounds every characteristic root", sb.lambda),
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprcore::Bindings;
    use crate::recmodel::{parse, parse_expr, parse_initial_conditions, Problem};
    use crate::verify::check_bounds_numeric;

    fn spec(text: &str, ics: &str) -> RecurrenceSpec {
        match parse(text).unwrap().with_initial_conditions(&parse_initial_conditions(ics).unwrap()) {
            Problem::Single(s) => s,
            Problem::System(_) => panic!(),
        }
    }

    const PAPER: &str = "x(n) = x(n-1) + x(n-3) + 2^n + n - 1";

    #[test]
    fn paper_leading_term() {
        let t = leading_term(&spec(PAPER, "")).unwrap();
        assert_eq!(t, BoundTerm::exact(Rat::new(8, 3), 0, Rat::from(2)));
    }

    #[test]
    fn homogeneous_leads() {
        let t = leading_term(&spec("x(n) = 2*x(n-1) + 1", "")).unwrap();
        assert_eq!(t.alpha, (Rat::from(2), Rat::from(2)));
        let t = leading_term(&spec("x(n) = 3*x(n-1) + 2^n", "x(0)=1")).unwrap();
        // x(n) = 3^(n+1) - 2^(n+1)
        assert_eq!(t, BoundTerm::exact(Rat::from(3), 0, Rat::from(3)));
    }

    #[test]
    fn paper_sandwich() {
        let s = spec(PAPER, "x(0)=0; x(1)=0; x(2)=0");
        let sb = expoly_sandwich(&s).unwrap();
        assert!(lambda_is_sound(&[Rat::one(), Rat::zero(), Rat::one()], &sb.lambda));
        assert_eq!(top_term(&sb.f), Some((Rat::new(8, 3), 0, Rat::from(2))));
        let report = check_bounds_numeric(&s, &Bindings::new(), &sb.lower("n"), &sb.upper("n"), 60).unwrap();
        assert!(report.ok, "{report:?}");
        let lower = parse_expr("8/3*2^n - 35/3*(l/(l-1))*l^n").unwrap().subs("l", &Expr::frac(1466, 1000));
        let upper = parse_expr("8/3*2^n + l^n*(l/(l-1)^2)*(0+1)").unwrap().subs("l", &Expr::frac(1466, 1000));
        let printed = check_bounds_numeric(&s, &Bindings::new(), &lower, &upper, 40).unwrap();
        assert!(printed.ok, "{printed:?}");
    }

    #[test]
    fn constant_is_exact() {
        let sb = expoly_sandwich(&spec("x(n) = x(n-1)", "x(0)=5")).unwrap();
        assert_eq!(sb.f, ExpPoly::rat(Rat::from(5)));
        assert_eq!(sb.g_plus.c, Some((Rat::zero(), Rat::zero())));
        assert_eq!(sb.g_minus.c, Some((Rat::zero(), Rat::zero())));
    }

    #[test]
    fn golden_ratio() {
        let s = spec("x(n) = x(n-1) + x(n-2) + 1", "x(0)=0; x(1)=0");
        let sb = expoly_sandwich(&s).unwrap();
        assert!(sb.lambda > Rat::new(1618, 1000) && sb.lambda <= Rat::new(1619, 1000));
        let report = check_bounds_numeric(&s, &Bindings::new(), &sb.lower("n"), &sb.upper("n"), 40).unwrap();
        assert!(report.ok);
    }

    #[test]
    fn rejections() {
        assert!(matches!(leading_term(&spec("x(n) = x(n-1) - x(n-2)", "")), Err(ApproxError::Unsupported(_))));
        assert!(matches!(
            expoly_sandwich(&spec("x(n) = x(n-1) + x(n-2)", "x(0)=1")),
            Err(ApproxError::MissingInitialCondition(_))
        ));
    }
}
