//! Classification of recurrences and dispatch to the solvers.

use std::fmt;

use crate::approxbounds::{approx_bounds, default_width};
use crate::dcbounds::{dc_bounds, dc_exact_on_powers, DcSpec};
use crate::exprcore::{eval_exact, normalize, Bindings, Expr, Rat};
use crate::linsolve::{
    eliminate_system, initial_symbol, order_reduce, shift_coefficients, shift_gcd, solve_const_coeff, to_expr,
};
use crate::recmodel::{IcIndex, Problem, RecurrenceSpec, Solution, SolutionKind, Verification};
use crate::transforms::{linearize_nonlinear, reduce_infinite_order, rewrite_multivariate, Inverse};
use crate::varsolve::solve_first_order_var;
use crate::verify::{
    check_bounds_from, check_solution_symbolic, iterate_oracle, sample_bindings, start_index, Verdict,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    LinearConstCoeff(i64),
    LinearVarCoeff(i64),
    NonLinear,
    InfiniteOrder,
    DivideConquer { alpha: Rat, beta: Rat },
    Multivariate,
    System,
    Unsupported(String),
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::LinearConstCoeff(k) => write!(f, "LinearConstCoeff({k})"),
            Classification::LinearVarCoeff(k) => write!(f, "LinearVarCoeff({k})"),
            Classification::NonLinear => write!(f, "NonLinear"),
            Classification::InfiniteOrder => write!(f, "InfiniteOrder"),
            Classification::DivideConquer { alpha, beta } => write!(f, "DivideConquer({alpha}, {beta})"),
            Classification::Multivariate => write!(f, "Multivariate"),
            Classification::System => write!(f, "System"),
            Classification::Unsupported(r) => write!(f, "Unsupported({r})"),
        }
    }
}

pub fn classify(spec: &RecurrenceSpec) -> Classification {
    if let Some(r) = &spec.irregular {
        return Classification::Unsupported(r.clone());
    }
    if !spec.is_univariate() {
        return Classification::Multivariate;
    }
    if spec.prefix_sum_coeff.is_some() {
        return Classification::InfiniteOrder;
    }
    if spec.nonlinear {
        return Classification::NonLinear;
    }
    if spec.divisor().is_some() {
        return match DcSpec::from_spec(spec) {
            Ok(dc) => Classification::DivideConquer { alpha: dc.alpha, beta: dc.beta },
            Err(e) => Classification::Unsupported(e.to_string()),
        };
    }
    if spec.shift_terms.is_empty() {
        return Classification::Unsupported("no recursive term".into());
    }
    let var = spec.var();
    if spec.shift_terms.values().any(|c| c.depends_on(var)) {
        Classification::LinearVarCoeff(spec.order())
    } else {
        Classification::LinearConstCoeff(spec.order())
    }
}

pub fn classify_problem(problem: &Problem) -> Classification {
    match problem {
        Problem::Single(s) => classify(s),
        Problem::System(_) => Classification::System,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Auto,
    Exact,
    Bounds,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOptions {
    pub mode: Mode,
    /// Largest index (or level, or grid size) checked against the oracle.
    pub horizon: i64,
    /// Enclosure width for dominant characteristic roots.
    pub root_width: Rat,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { mode: Mode::Auto, horizon: 64, root_width: default_width() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub classification: Classification,
    pub solution: Solution,
    /// The univariate recurrence actually checked against the oracle.
    pub checked: Option<RecurrenceSpec>,
}

/// Error text led by the error variant's name.
fn reason<E: fmt::Debug + fmt::Display>(e: E) -> String {
    let dbg = format!("{e:?}");
    let name = dbg.split(['(', ' ', '{']).next().unwrap_or_default().to_string();
    format!("{name}: {e}")
}

/// Adds symbolic values `x0, x1, …` for missing leading initial values.
pub fn complete_initials(spec: &RecurrenceSpec) -> RecurrenceSpec {
    let mut out = spec.clone();
    if !spec.is_univariate() || spec.prefix_sum_coeff.is_some() {
        return out;
    }
    let (start, count) = match spec.divisor() {
        Some(_) => (if spec.initial_conditions.is_empty() { 1 } else { start_index(spec) }, 1),
        None => (start_index(spec), deepest_shift(spec)),
    };
    for k in start..start + count {
        out.initial_conditions
            .entry(vec![IcIndex::Int(k)])
            .or_insert_with(|| Expr::sym(&initial_symbol(&spec.unknown, k)));
    }
    out
}

/// Largest backward offset among the unknown's occurrences, including
/// non-linear ones.
fn deepest_shift(spec: &RecurrenceSpec) -> i64 {
    let n = Expr::sym(spec.var());
    let mut deepest = spec.order();
    spec.rhs.visit(&mut |e| {
        if let Expr::Unknown(name, args) = e {
            if *name == spec.unknown && args.len() == 1 {
                let d = normalize(&(n.clone() - args[0].clone()));
                if let Some(d) = d.as_rat().and_then(Rat::to_i64) {
                    deepest = deepest.max(d);
                }
            }
        }
    });
    deepest
}

pub fn solve(spec: &RecurrenceSpec, opts: &SolveOptions) -> Solution {
    solve_problem(&Problem::Single(spec.clone()), opts).solution
}

pub fn solve_problem(problem: &Problem, opts: &SolveOptions) -> Outcome {
    let classification = classify_problem(problem);
    let spec = match problem {
        Problem::Single(s) => complete_initials(s),
        Problem::System(sys) => {
            let target = sys.equations[0].unknown.clone();
            match eliminate_system(sys, &target) {
                Ok(reduced) => reduced,
                Err(e) => {
                    return Outcome { classification, solution: Solution::unsolved(reason(e)), checked: None };
                }
            }
        }
    };
    let inner = if matches!(problem, Problem::System(_)) { classify(&spec) } else { classification.clone() };
    let mut solution = dispatch(&spec, &inner, opts);
    if let Problem::System(_) = problem {
        solution.assumptions.insert(0, format!("reduced to {}", spec.render()));
    }
    if !solution.is_unsolved() {
        solution.verification = Some(verify_solution(&spec, &solution, opts.horizon));
    }
    Outcome { classification, solution, checked: Some(spec) }
}

fn dispatch(spec: &RecurrenceSpec, class: &Classification, opts: &SolveOptions) -> Solution {
    let exact = || exact_for(spec, class);
    let bounds = || bounds_for(spec, class, opts);
    let result = match opts.mode {
        Mode::Exact => exact(),
        Mode::Bounds => bounds().or_else(|b| match exact() {
            Ok(Solution { kind: SolutionKind::Exact(e), domain, assumptions, .. }) => {
                Ok(Solution::bounds(e.clone(), e, domain).with_assumptions(assumptions))
            }
            _ => Err(b),
        }),
        Mode::Auto => exact().or_else(|a| {
            if has_bounding_method(class) {
                bounds().map_err(|b| format!("{a}; {b}"))
            } else {
                Err(a)
            }
        }),
    };
    result.unwrap_or_else(Solution::unsolved)
}

fn exact_for(spec: &RecurrenceSpec, class: &Classification) -> Result<Solution, String> {
    match class {
        Classification::LinearConstCoeff(_) => exact_linear(spec),
        Classification::LinearVarCoeff(1) => exact_var(spec),
        Classification::LinearVarCoeff(k) => Err(format!("Unsupported: variable coefficients of order {k}")),
        Classification::NonLinear => exact_nonlinear(spec),
        Classification::InfiniteOrder => exact_infinite(spec),
        Classification::DivideConquer { .. } => {
            let e = dc_exact_on_powers(spec).map_err(reason)?;
            let dc = DcSpec::from_spec(spec).map_err(reason)?;
            Ok(Solution::exact(e, crate::dcbounds::well_defined_domain(&dc, spec.var())))
        }
        Classification::Multivariate => exact_multivariate(spec),
        Classification::System => Err("Unsupported: nested system".into()),
        Classification::Unsupported(r) => Err(format!("Unsupported: {r}")),
    }
}

fn has_bounding_method(class: &Classification) -> bool {
    matches!(class, Classification::LinearConstCoeff(_) | Classification::DivideConquer { .. })
}

fn bounds_for(spec: &RecurrenceSpec, class: &Classification, opts: &SolveOptions) -> Result<Solution, String> {
    match class {
        Classification::LinearConstCoeff(_) => approx_bounds(spec, &opts.root_width).map_err(reason),
        Classification::DivideConquer { .. } => dc_bounds(spec).map_err(reason),
        Classification::Unsupported(r) => Err(format!("Unsupported: {r}")),
        other => Err(format!("Unsupported: no bounding method for {other}")),
    }
}

/// Univariate exact solvers, used directly and after transformations.
fn exact_univariate(spec: &RecurrenceSpec) -> Result<Solution, String> {
    match classify(spec) {
        Classification::LinearConstCoeff(_) => exact_linear(spec),
        Classification::LinearVarCoeff(1) => exact_var(spec),
        other => Err(format!("Unsupported: transformed recurrence is {other}")),
    }
}

fn exact_linear(spec: &RecurrenceSpec) -> Result<Solution, String> {
    let var = spec.var();
    let g = shift_gcd(&shift_coefficients(spec).map_err(reason)?);
    if g > 1 {
        let parts = order_reduce(spec).map_err(reason)?;
        let mut branches = Vec::new();
        for (sub, _) in &parts {
            let sol = solve_const_coeff(sub).map_err(reason)?;
            branches.push(to_expr(&sol, sub.var()));
        }
        let m = parts[0].0.var().to_string();
        return Ok(Solution {
            kind: SolutionKind::Piecewise { modulus: g, branches },
            domain: format!("{var} = {g}*{m} + r, {var} >= {}", start_index(spec)),
            assumptions: Vec::new(),
            verification: None,
        });
    }
    let sol = solve_const_coeff(spec).map_err(reason)?;
    Ok(Solution::exact(to_expr(&sol, var), format!("{var} >= {}", sol.valid_from)))
}

fn exact_var(spec: &RecurrenceSpec) -> Result<Solution, String> {
    let sol = solve_first_order_var(spec).map_err(reason)?;
    let mut assumptions = Vec::new();
    if sol.has_unevaluated {
        assumptions.push("contains an unevaluated sum or product".into());
    }
    Ok(Solution::exact(sol.closed, format!("{} >= {}", spec.var(), sol.valid_from)).with_assumptions(assumptions))
}

fn exact_nonlinear(spec: &RecurrenceSpec) -> Result<Solution, String> {
    let tr = linearize_nonlinear(spec).map_err(reason)?;
    let sol = exact_univariate(&tr.transformed)?;
    let y = sol.closed_form().ok_or("Unsupported: transformed solution is not a single closed form")?;
    let x = tr.apply_inverse(y).map_err(reason)?;
    Ok(Solution::exact(x, sol.domain).with_assumptions(tr.assumptions))
}

fn exact_infinite(spec: &RecurrenceSpec) -> Result<Solution, String> {
    let tr = reduce_infinite_order(spec).map_err(reason)?;
    let sol = exact_univariate(&tr.transformed)?;
    let closed = sol.closed_form().ok_or("Unsupported: reduced solution is not a single closed form")?.clone();
    let var = spec.var();
    let Inverse::Seeded { seeds, .. } = &tr.inverse else { unreachable!("seeded inverse") };
    let x0 = &seeds[0].1;
    let sample = sample_bindings(&spec.parameters());
    let mut at0 = sample.clone();
    at0.insert(var.to_string(), Rat::zero());
    let covers_zero = matches!(
        (eval_exact(&closed, &at0), eval_exact(x0, &sample)),
        (Ok(a), Ok(b)) if a == b
    ) && x0.free_symbols().is_empty();
    let mut assumptions = tr.assumptions.clone();
    let domain = if covers_zero {
        format!("{var} >= 0")
    } else {
        assumptions.push(format!("{}(0) = {x0}", spec.unknown));
        format!("{var} >= 1")
    };
    Ok(Solution::exact(closed, domain).with_assumptions(assumptions))
}

fn exact_multivariate(spec: &RecurrenceSpec) -> Result<Solution, String> {
    let tr = rewrite_multivariate(spec).map_err(reason)?;
    let sol = exact_univariate(&tr.transformed)?;
    let y = sol.closed_form().ok_or("Unsupported: rewritten solution is not a single closed form")?;
    let x = tr.apply_inverse(y).map_err(reason)?;
    let Inverse::Reindex { t_value, .. } = &tr.inverse else { unreachable!("reindexing inverse") };
    let from = start_index(&tr.transformed);
    let mut assumptions = tr.assumptions.clone();
    assumptions.push(tr.description.clone());
    Ok(Solution::exact(x, format!("{t_value} >= {from}")).with_assumptions(assumptions))
}

// ---- verification ----

fn oracle_horizon(spec: &RecurrenceSpec, horizon: i64) -> i64 {
    if spec.divisor().is_some() {
        horizon.min(16)
    } else if spec.nonlinear {
        // values grow doubly exponentially
        horizon.min(10)
    } else if !spec.is_univariate() {
        horizon.min(10)
    } else {
        horizon
    }
}

/// Compares a closed form with the oracle; `Err` carries the reason the
/// comparison could not run.
fn oracle_agrees(spec: &RecurrenceSpec, e: &Expr, b: &Bindings, n_max: i64, from: i64) -> Result<Option<Rat>, String> {
    let table = iterate_oracle(spec, b, n_max).map_err(|e| e.to_string())?;
    for (idx, v) in table.points.iter().filter(|(idx, _)| idx.len() > 1 || idx[0] >= Rat::from(from)) {
        let mut at = b.clone();
        for (var, x) in spec.index_vars.iter().zip(idx) {
            at.insert(var.clone(), x.clone());
        }
        match eval_exact(e, &at) {
            Ok(got) if got == *v => {}
            Ok(_) => return Ok(Some(idx[0].clone())),
            Err(err) => return Err(err.to_string()),
        }
    }
    Ok(None)
}

/// `k` of a domain written `var >= k`.
fn domain_start(spec: &RecurrenceSpec, domain: &str) -> Option<i64> {
    if !spec.is_univariate() {
        return None;
    }
    domain.strip_prefix(spec.var())?.trim_start().strip_prefix(">=")?.trim().parse().ok()
}

fn verify_solution(spec: &RecurrenceSpec, sol: &Solution, horizon: i64) -> Verification {
    let n_max = oracle_horizon(spec, horizon);
    let b = sample_bindings(&spec.parameters());
    match &sol.kind {
        SolutionKind::Exact(e) => {
            let start = start_index(spec);
            let from = domain_start(spec, &sol.domain).unwrap_or(start);
            // a later start leaves the seeds outside the closed form
            let verdict = if spec.is_univariate() && spec.divisor().is_none() && from > start {
                Verdict::Unknown(format!("closed form claimed from {from} only"))
            } else {
                check_solution_symbolic(spec, e)
            };
            let oracle = oracle_agrees(spec, e, &b, n_max, from);
            let (ok, detail) = match (&verdict, &oracle) {
                (Verdict::Refuted(n), _) => (false, format!("refuted at {n}")),
                (_, Ok(Some(n))) => (false, format!("disagrees with iteration at {n}")),
                (Verdict::Certified, Ok(None)) => (true, "certified; agrees with iteration".into()),
                (Verdict::Certified, Err(why)) => (true, format!("certified; iteration unavailable ({why})")),
                (Verdict::Unknown(why), Ok(None)) => (true, format!("agrees with iteration; {why}")),
                (Verdict::Unknown(why), Err(o)) => (false, format!("not verified: {why}; {o}")),
            };
            Verification { checked_up_to: n_max, ok, detail }
        }
        SolutionKind::Piecewise { modulus, branches } => {
            let var = spec.var();
            let m = if var == "m" { "m_" } else { "m" };
            let table = match iterate_oracle(spec, &b, n_max) {
                Ok(t) => t,
                Err(e) => return Verification { checked_up_to: n_max, ok: false, detail: e.to_string() },
            };
            for (idx, v) in &table.points {
                let n = idx[0].to_i64().expect("integer index");
                let r = n.rem_euclid(*modulus);
                let mut at = b.clone();
                at.insert(m.to_string(), Rat::from(n.div_euclid(*modulus)));
                if eval_exact(&branches[r as usize], &at).ok().as_ref() != Some(v) {
                    return Verification { checked_up_to: n_max, ok: false, detail: format!("disagrees with iteration at {n}") };
                }
            }
            Verification { checked_up_to: n_max, ok: true, detail: "agrees with iteration".into() }
        }
        SolutionKind::Bounds { lower, upper } => match check_bounds_from(
            spec,
            &b,
            lower,
            upper,
            n_max,
            domain_start(spec, &sol.domain).unwrap_or(i64::MIN),
        ) {
            Ok(r) if r.ok => Verification { checked_up_to: n_max, ok: true, detail: format!("sandwich holds at {} points", r.checked) },
            Ok(r) => {
                let (at, why) = r.first_violation.unwrap_or_default();
                Verification { checked_up_to: n_max, ok: false, detail: format!("{why} at {at}") }
            }
            Err(e) => Verification { checked_up_to: n_max, ok: false, detail: e.to_string() },
        },
        SolutionKind::Unsolved(_) => Verification { checked_up_to: 0, ok: false, detail: "unsolved".into() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recmodel::{parse, parse_expr, parse_initial_conditions};

    fn problem(text: &str, ics: &str) -> Problem {
        parse(text).unwrap().with_initial_conditions(&parse_initial_conditions(ics).unwrap())
    }

    fn class_of(text: &str) -> Classification {
        classify_problem(&problem(text, ""))
    }

    #[test]
    fn classes() {
        assert_eq!(class_of("x(n) = 5*x(n-1) - 6*x(n-2) + n^2"), Classification::LinearConstCoeff(2));
        assert_eq!(class_of("x(n) = n*x(n-1) + 2"), Classification::LinearVarCoeff(1));
        assert_eq!(class_of("x(n) = 3*x(n-1)^2"), Classification::NonLinear);
        assert_eq!(class_of("x(n) = n/2 + n*sum(x, k, 0, n-1)"), Classification::InfiniteOrder);
        assert_eq!(
            class_of("x(n) = 7*x(n/2) + 9/2*n^2"),
            Classification::DivideConquer { alpha: Rat::from(7), beta: Rat::from(2) }
        );
        assert_eq!(class_of("x(m, n) = a + x(m-1, n+1)"), Classification::Multivariate);
        assert_eq!(class_of("x(n) = y(n-1); y(n) = x(n-1)"), Classification::System);
        assert!(matches!(class_of("x(n) = n^2"), Classification::Unsupported(_)));
    }

    #[test]
    fn fibonacci() {
        let out = solve_problem(&problem("x(n) = x(n-1) + x(n-2)", "x(0)=0; x(1)=1"), &SolveOptions::default());
        let e = out.solution.closed_form().unwrap();
        assert_eq!(eval_exact(e, &crate::exprcore::eval::bindings([("n", Rat::from(10))])).unwrap(), Rat::from(55));
        assert!(out.solution.verification.unwrap().ok);
    }

    #[test]
    fn constant_sequence() {
        let out = solve_problem(&problem("x(n) = x(n-1)", "x(0)=c"), &SolveOptions::default());
        assert_eq!(out.solution.kind, SolutionKind::Exact(Expr::sym("c")));
    }

    #[test]
    fn strassen_modes() {
        let p = problem("x(n) = 7*x(n/2) + 9/2*n^2", "x(1)=1");
        let bounds = solve_problem(&p, &SolveOptions { mode: Mode::Bounds, ..Default::default() });
        assert!(matches!(bounds.solution.kind, SolutionKind::Bounds { .. }));
        assert!(bounds.solution.verification.unwrap().ok);
        let exact = solve_problem(&p, &SolveOptions::default());
        assert!(exact.solution.verification.unwrap().ok);
    }

    #[test]
    fn unsolved_reason_names_the_error() {
        let out = solve_problem(&problem("x(n) = x(n-1)^2 + 1", ""), &SolveOptions::default());
        let SolutionKind::Unsolved(r) = out.solution.kind else { panic!() };
        assert!(r.starts_with("NotPowerProduct"), "{r}");
    }

    #[test]
    fn piecewise() {
        let out = solve_problem(&problem("x(n) = 4*x(n-2) + 1", "x(0)=0; x(1)=1"), &SolveOptions::default());
        assert!(matches!(out.solution.kind, SolutionKind::Piecewise { modulus: 2, .. }));
        assert!(out.solution.verification.unwrap().ok);
    }

    #[test]
    fn list_reverse() {
        let out = solve_problem(&problem("x(m, n) = a + x(m-1, n+1)", "x(0,n)=9"), &SolveOptions::default());
        assert_eq!(out.solution.closed_form(), Some(&crate::exprcore::normalize(&parse_expr("9 + a*m").unwrap())));
        assert!(out.solution.verification.unwrap().ok);
    }

    #[test]
    fn paper_system_falls_back_to_bounds() {
        let p = problem(
            "x(n) = x(n-1) + y(n-1) + 2^n; y(n) = z(n-1) + n - 1; z(n) = x(n-1) + 1",
            "x(0)=0; y(0)=0; z(0)=0",
        );
        let out = solve_problem(&p, &SolveOptions::default());
        assert_eq!(out.classification, Classification::System);
        assert!(matches!(out.solution.kind, SolutionKind::Bounds { .. }), "{:?}", out.solution);
        assert!(out.solution.verification.unwrap().ok);
    }
}
