//! Divide-and-conquer recurrences `x(n) = α·x(n/β) + g(n)`.

use thiserror::Error;

use crate::exprcore::{normalize, to_expoly, Coef, ExpPoly, Expr, Poly, Quad, Rat};
use crate::linsolve::initial_symbol;
use crate::recmodel::{RecurrenceSpec, Shift, Solution};
use crate::summation::sum_expoly;
use crate::verify::start_index;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DcError {
    #[error("not a divide-and-conquer recurrence")]
    NotDivideAndConquer,
    #[error("ill-formed divide-and-conquer recurrence: {0}")]
    IllFormed(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DcSpec {
    pub alpha: Rat,
    pub beta: Rat,
    pub g: Poly,
    pub n0: i64,
    pub base_value: Expr,
}

impl DcSpec {
    pub fn from_spec(spec: &RecurrenceSpec) -> Result<DcSpec, DcError> {
        let beta = spec.divisor().cloned().ok_or(DcError::NotDivideAndConquer)?;
        if spec.shift_terms.len() != 1 || spec.nonlinear || spec.prefix_sum_coeff.is_some() || !spec.is_univariate() {
            return Err(DcError::IllFormed("more than one recursive term".into()));
        }
        let coeff = &spec.shift_terms[&Shift::Divide(beta.clone())];
        let alpha = coeff
            .as_rat()
            .cloned()
            .ok_or_else(|| DcError::IllFormed(format!("coefficient {coeff} is not a rational constant")))?;
        if !alpha.is_positive() {
            return Err(DcError::IllFormed(format!("coefficient {alpha} is not positive")));
        }
        if beta <= Rat::one() {
            return Err(DcError::IllFormed(format!("divisor {beta} is not above 1")));
        }
        let var = spec.var();
        let g = to_expoly(&spec.forcing, var)
            .ok()
            .and_then(|xp| xp.as_rat_poly())
            .ok_or_else(|| DcError::IllFormed(format!("{} is not a rational polynomial", spec.forcing)))?;
        let n0 = if spec.initial_conditions.is_empty() { 1 } else { start_index(spec) };
        if n0 < 1 || Rat::from(n0) >= beta {
            return Err(DcError::IllFormed(format!("base index {n0} must be positive and below {beta}")));
        }
        // g(n0 + u) with non-negative coefficients is non-negative and
        // non-decreasing for n >= n0
        let taylor = g.shift(&Rat::from(n0));
        if taylor.terms().any(|(_, c)| c.is_negative()) {
            return Err(DcError::IllFormed(format!("{} may decrease or go negative", spec.forcing)));
        }
        let base_value =
            spec.ic_at(n0).cloned().unwrap_or_else(|| Expr::sym(&initial_symbol(&spec.unknown, n0)));
        Ok(DcSpec { alpha, beta, g, n0, base_value })
    }

    /// `x(n0·β^k)` as an exponential polynomial in the level `k`.
    pub fn level_form(&self) -> ExpPoly {
        let alpha = Quad::rat(self.alpha.clone());
        let mut total = ExpPoly::monomial(Coef::atom(&self.base_value), 0, alpha.clone());
        for (d, c) in self.g.terms() {
            let bd = self.beta.pow(d as i64);
            // Σ_{i=0}^{k-1} (α/β^d)^i
            let ratio = ExpPoly::monomial(Coef::one(), 0, Quad::rat(&self.alpha / &bd));
            let inner = sum_expoly(&ratio, 0, -1);
            let scale = Coef::rat(c * Rat::from(self.n0).pow(d as i64));
            let outer = ExpPoly::monomial(scale, 0, Quad::rat(bd));
            let piece = outer.try_mul(&inner).expect("rational field");
            total = total.try_add(&piece).expect("rational field");
        }
        total
    }

    /// Rewrites a level form in terms of `n = n0·β^k`.
    fn to_index(&self, xp: &ExpPoly, var: &str) -> Expr {
        let ratio = normalize(&(Expr::sym(var) / Expr::int(self.n0)));
        let log_beta = Expr::log(Expr::rat(self.beta.clone()));
        let level = normalize(&(Expr::log(ratio.clone()) / log_beta.clone()));
        let mut terms = Vec::new();
        for t in xp.terms() {
            let b = t.base.as_rat().expect("rational base").clone();
            let power = match integer_log(&b, &self.beta) {
                Some(e) => Expr::powi(ratio.clone(), e),
                None => Expr::pow(ratio.clone(), Expr::log(Expr::rat(b)) / log_beta.clone()),
            };
            for (j, c) in t.coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                terms.push(Expr::Mul(vec![c.to_expr(), Expr::powi(level.clone(), j as i64), power.clone()]));
            }
        }
        normalize(&Expr::Add(terms))
    }
}

/// `e` with `beta^e == b`, when it is a small integer.
fn integer_log(b: &Rat, beta: &Rat) -> Option<i64> {
    (-64..=64).find(|&e| beta.pow(e) == *b)
}

/// Exact solution at `n = n0·β^k`.
pub fn dc_exact_on_powers(spec: &RecurrenceSpec) -> Result<Expr, DcError> {
    let dc = DcSpec::from_spec(spec)?;
    Ok(dc.to_index(&dc.level_form(), spec.var()))
}

/// Human-readable description of the indices the recurrence reaches.
pub fn well_defined_domain(dc: &DcSpec, var: &str) -> String {
    if dc.n0 == 1 {
        format!("{var} = {}^k, k >= 0", dc.beta)
    } else {
        format!("{var} = {}*{}^k, k >= 0", dc.n0, dc.beta)
    }
}

/// Lower and upper bounds valid at every index the recurrence reaches.
///
/// Repeated exact division reaches `n0` only along `n0·β^k`, where the level
/// sum is exact, so the bounds coincide.
pub fn dc_bounds(spec: &RecurrenceSpec) -> Result<Solution, DcError> {
    let dc = DcSpec::from_spec(spec)?;
    let exact = dc.to_index(&dc.level_form(), spec.var());
    let mut assumptions = Vec::new();
    if !dc.g.is_zero() {
        assumptions.push(format!("{} is non-negative and non-decreasing for {} >= {}", spec.forcing, spec.var(), dc.n0));
    }
    Ok(Solution::bounds(exact.clone(), exact, well_defined_domain(&dc, spec.var())).with_assumptions(assumptions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprcore::eval::bindings;
    use crate::exprcore::{eval_exact, Bindings};
    use crate::recmodel::{parse, parse_expr, parse_initial_conditions, Problem, SolutionKind};
    use crate::verify::{check_bounds_numeric, iterate_oracle};

    fn spec(text: &str, ics: &str) -> RecurrenceSpec {
        match parse(text).unwrap().with_initial_conditions(&parse_initial_conditions(ics).unwrap()) {
            Problem::Single(s) => s,
            Problem::System(_) => panic!(),
        }
    }

    fn agrees_on_powers(s: &RecurrenceSpec, e: &Expr, b: &Bindings, levels: i64) {
        for (idx, v) in iterate_oracle(s, b, levels).unwrap().points {
            let mut at = b.clone();
            at.insert(s.var().to_string(), idx[0].clone());
            assert_eq!(eval_exact(e, &at).unwrap(), v, "at {}", idx[0]);
        }
    }

    #[test]
    fn strassen() {
        let s = spec("x(n) = 7*x(n/2) + 9/2*n^2", "x(1)=1");
        let e = dc_exact_on_powers(&s).unwrap();
        agrees_on_powers(&s, &e, &Bindings::new(), 10);
        let printed = parse_expr("7*n^(log(7)/log(2)) - 6*n^2").unwrap();
        for k in 0..=10 {
            let b = bindings([("n", Rat::from(1i64 << k))]);
            assert_eq!(eval_exact(&e, &b).unwrap(), eval_exact(&printed, &b).unwrap());
        }
    }

    #[test]
    fn mergesort_symbolic_base() {
        let s = spec("x(n) = 2*x(n/2) + n - 1", "");
        let e = dc_exact_on_powers(&s).unwrap();
        let expected = parse_expr("n*log(n)/log(2) - n + 1 + n*x1").unwrap();
        for x1 in [0, 5] {
            let b = bindings([("x1", Rat::from(x1))]);
            let with_ic = spec("x(n) = 2*x(n/2) + n - 1", &format!("x(1)={x1}"));
            agrees_on_powers(&with_ic, &e, &b, 10);
            for k in 0..=10 {
                let mut at = b.clone();
                at.insert("n".into(), Rat::from(1i64 << k));
                assert_eq!(eval_exact(&e, &at).unwrap(), eval_exact(&expected, &at).unwrap());
            }
        }
    }

    #[test]
    fn constant_chain() {
        let s = spec("x(n) = x(n/2)", "");
        assert_eq!(dc_exact_on_powers(&s).unwrap(), Expr::sym("x1"));
        let sol = dc_bounds(&s).unwrap();
        assert_eq!(sol.kind, SolutionKind::Bounds { lower: Expr::sym("x1"), upper: Expr::sym("x1") });
    }

    #[test]
    fn bounds_sandwich_oracle() {
        let s = spec("x(n) = 7*x(n/2) + 9/2*n^2", "x(1)=1");
        let SolutionKind::Bounds { lower, upper } = dc_bounds(&s).unwrap().kind else { panic!() };
        let report = check_bounds_numeric(&s, &Bindings::new(), &lower, &upper, 12).unwrap();
        assert!(report.ok);
    }

    #[test]
    fn ill_formed() {
        assert!(matches!(DcSpec::from_spec(&spec("x(n) = 2*x(n/2) + 2^n", "x(1)=1")), Err(DcError::IllFormed(_))));
        assert!(matches!(DcSpec::from_spec(&spec("x(n) = 2*x(n/2) - n", "x(1)=1")), Err(DcError::IllFormed(_))));
        assert!(matches!(DcSpec::from_spec(&spec("x(n) = -2*x(n/2)", "x(1)=1")), Err(DcError::IllFormed(_))));
    }

    #[test]
    fn mergesort_asymptotics() {
        let s = spec("x(n) = 2*x(n/2) + n - 1", "x(1)=0");
        let e = dc_exact_on_powers(&s).unwrap();
        let n = Rat::from(1i64 << 20);
        let v = eval_exact(&e, &bindings([("n", n.clone())])).unwrap();
        let ratio = v / (n * Rat::from(20));
        assert!((ratio - Rat::one()).abs() < Rat::new(1, 10));
    }
}
