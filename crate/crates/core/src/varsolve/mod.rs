//! First-order linear recurrences with variable coefficients,
//! `x(n) = a(n)·x(n-1) + b(n)`.

use thiserror::Error;

use crate::exprcore::poly::ratfunc_from_expr;
use crate::exprcore::{eval_exact, normalize, to_expoly, Bindings, Expr, Func};
use crate::linsolve::initial_symbol;
use crate::recmodel::{RecurrenceSpec, Shift};
use crate::summation::{gosper, product_closed, sum_expoly};
use crate::verify::start_index;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VarError {
    #[error("not a first-order linear recurrence")]
    NotFirstOrder,
    #[error("coefficient vanishes or is undefined at n = {0}")]
    CoefficientVanishes(i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarSolution {
    pub closed: Expr,
    /// Smallest index covered by `closed`.
    pub valid_from: i64,
    /// Initial values left symbolic.
    pub free_initials: Vec<String>,
    /// Whether an unevaluated sum or product remains.
    pub has_unevaluated: bool,
}

/// `a(n)` of a first-order linear spec.
pub fn first_order_coefficient(spec: &RecurrenceSpec) -> Result<Expr, VarError> {
    if !spec.is_univariate()
        || spec.nonlinear
        || spec.prefix_sum_coeff.is_some()
        || !spec.cross_terms.is_empty()
        || spec.shift_terms.len() != 1
    {
        return Err(VarError::NotFirstOrder);
    }
    spec.shift_terms.get(&Shift::Offset(vec![1])).cloned().ok_or(VarError::NotFirstOrder)
}

/// First integer `k > k0` at which `a` vanishes or has a pole.
fn first_singularity(a: &Expr, var: &str, k0: i64) -> Option<i64> {
    let rf = ratfunc_from_expr(a, var)?;
    rf.num
        .rational_roots()
        .into_iter()
        .chain(rf.den.rational_roots())
        .filter(|r| r.is_integer())
        .filter_map(|r| r.to_i64())
        .filter(|&r| r > k0)
        .min()
}

pub fn solve_first_order_var(spec: &RecurrenceSpec) -> Result<VarSolution, VarError> {
    let a = first_order_coefficient(spec)?;
    let var = spec.var().to_string();
    let k0 = start_index(spec);
    if let Some(k) = first_singularity(&a, &var, k0) {
        return Err(VarError::CoefficientVanishes(k));
    }
    let n = Expr::sym(&var);
    let j = fresh(&var, "j");
    let k = fresh(&var, "k");
    let mut free = Vec::new();
    let x0 = match spec.ic_at(k0) {
        Some(v) => v.clone(),
        None => {
            let s = initial_symbol(&spec.unknown, k0);
            free.push(s.clone());
            Expr::sym(&s)
        }
    };
    let mut unevaluated = false;
    let a_k = a.subs(&var, &Expr::sym(&k));
    let lo = Expr::int(k0 + 1);
    let product = match product_closed(&a_k, &k, &lo, &n) {
        Ok(p) => p,
        Err(_) => {
            unevaluated = true;
            Expr::func(Func::Prod, vec![a_k.clone(), Expr::sym(&k), lo.clone(), n.clone()])
        }
    };
    let b = spec.forcing.clone();
    let sum = if b.is_zero() {
        Expr::zero()
    } else {
        let p_j = product.subs(&var, &Expr::sym(&j));
        let t = normalize(&(b.subs(&var, &Expr::sym(&j)) / p_j));
        match close_sum(&t, &j, k0, &var) {
            Some(s) => s,
            None => {
                unevaluated = true;
                Expr::func(Func::Sum, vec![t, Expr::sym(&j), lo, n.clone()])
            }
        }
    };
    let closed = normalize(&(product * (x0 + sum)));
    Ok(VarSolution { closed, valid_from: k0, free_initials: free, has_unevaluated: unevaluated })
}

/// `Σ_{j=k0+1}^{n} t(j)` in closed form, when available.
fn close_sum(t: &Expr, j: &str, k0: i64, var: &str) -> Option<Expr> {
    if let Ok(xp) = to_expoly(t, j) {
        return Some(sum_expoly(&xp, k0 + 1, 0).to_expr(var));
    }
    let s = gosper(t, j).ok()?;
    // S(n) - S(k0), with S(k0) required to be defined
    let at_start = normalize(&s.subs(j, &Expr::int(k0)));
    let bound: Bindings = s.free_symbols().into_iter().filter(|x| x != j).map(|x| (x, 1.into())).collect();
    eval_exact(&at_start, &bound).ok()?;
    Some(normalize(&(s.subs(j, &Expr::sym(var)) - at_start)))
}

/// A bound-variable name distinct from the index variable.
fn fresh(var: &str, want: &str) -> String {
    if var == want {
        format!("{want}_")
    } else {
        want.to_string()
    }
}
