//! Linear recurrences of finite order with constant coefficients.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::exprcore::linalg::{rank, solve, LinearOutcome};
use crate::exprcore::{normalize, to_expoly, Coef, ExpPoly, Expr, FieldMismatch, Poly, Quad, Rat};
use crate::recmodel::{IcIndex, IcMap, RecurrenceSpec, RecurrenceSystem, Shift};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinError {
    #[error("coefficients are not rational constants")]
    NotConstCoeff,
    #[error("characteristic factor {0} has no exact roots")]
    Unresolved(String),
    #[error("forcing term is not an exponential polynomial: {0}")]
    Forcing(String),
    #[error("initial conditions do not determine the solution")]
    SingularSystem,
    #[error("shifts have gcd 1")]
    NotReducible,
    #[error("system cannot be reduced to one recurrence: {0}")]
    NotEliminable(String),
    #[error("values from different quadratic fields")]
    Field(#[from] FieldMismatch),
}

/// `x(n) = Σ a_i·x(n - i) + forcing(n)` with `coeffs[i - 1] = a_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstCoeffRec {
    pub coeffs: Vec<Rat>,
    pub forcing: ExpPoly,
}

impl ConstCoeffRec {
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn from_spec(spec: &RecurrenceSpec) -> Result<ConstCoeffRec, LinError> {
        let coeffs = shift_coefficients(spec)?;
        let forcing = to_expoly(&spec.forcing, spec.var()).map_err(|e| LinError::Forcing(e.0))?;
        Ok(ConstCoeffRec { coeffs, forcing })
    }

    /// `f(n) - Σ a_i f(n - i)`.
    pub fn apply(&self, f: &ExpPoly) -> Result<ExpPoly, FieldMismatch> {
        let mut out = f.clone();
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let term = f.shift(-(i as i64 + 1)).try_scale(&Coef::rat(a.clone()))?;
            out = out.try_sub(&term)?;
        }
        Ok(out)
    }
}

/// Dense `a_1..a_order` from a univariate spec with rational coefficients.
pub fn shift_coefficients(spec: &RecurrenceSpec) -> Result<Vec<Rat>, LinError> {
    let mut coeffs = Vec::new();
    for (shift, c) in &spec.shift_terms {
        let Shift::Offset(d) = shift else { return Err(LinError::NotConstCoeff) };
        if d.len() != 1 || d[0] < 1 {
            return Err(LinError::NotConstCoeff);
        }
        let a = c.as_rat().ok_or(LinError::NotConstCoeff)?;
        let i = d[0] as usize;
        if coeffs.len() < i {
            coeffs.resize(i, Rat::zero());
        }
        coeffs[i - 1] = a.clone();
    }
    if spec.prefix_sum_coeff.is_some() || spec.nonlinear || !spec.cross_terms.is_empty() {
        return Err(LinError::NotConstCoeff);
    }
    Ok(coeffs)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharDecomposition {
    pub coeffs: Vec<Rat>,
    pub poly: Poly,
    /// Exact roots with multiplicity, ascending.
    pub roots: Vec<(Quad, u32)>,
    /// Factor whose roots are not representable.
    pub unresolved: Option<Poly>,
}

impl CharDecomposition {
    pub fn is_complete(&self) -> bool {
        self.unresolved.is_none()
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Multiplicity of `alpha` as a root of the characteristic polynomial.
    pub fn multiplicity(&self, alpha: &Quad) -> u32 {
        let mut p = self.poly.clone();
        let mut m = 0;
        while !p.is_zero() && p.eval_quad(alpha).is_zero() {
            m += 1;
            p = p.derivative();
        }
        m
    }
}

/// `t^d - Σ a_i t^(d - i)`.
pub fn char_poly(coeffs: &[Rat]) -> Poly {
    let d = coeffs.len() as u32;
    let mut p = Poly::monomial(Rat::one(), d);
    for (i, a) in coeffs.iter().enumerate() {
        p = &p - &Poly::monomial(a.clone(), d - 1 - i as u32);
    }
    p
}

fn multiplicity_of_factor(p: &Poly, f: &Poly) -> (u32, Poly) {
    let mut m = 0;
    let mut rest = p.clone();
    loop {
        let (q, r) = rest.div_rem(f);
        if !r.is_zero() {
            return (m, rest);
        }
        rest = q;
        m += 1;
    }
}

pub fn char_decompose_coeffs(coeffs: &[Rat]) -> CharDecomposition {
    let poly = char_poly(coeffs);
    let mut roots: Vec<(Quad, u32)> = Vec::new();
    let mut rest = poly.clone();
    let mut seen: Vec<Rat> = poly.rational_roots();
    seen.dedup();
    for r in seen {
        let (m, q) = multiplicity_of_factor(&rest, &Poly::linear_root(&r));
        rest = q;
        roots.push((Quad::rat(r), m));
    }
    if rest.degree() > 0 {
        let f = rest.square_free();
        if f.degree() == 2 {
            if let Some((r1, r2)) = f.quadratic_roots() {
                let (m, q) = multiplicity_of_factor(&rest, &f);
                roots.push((r1, m));
                roots.push((r2, m));
                rest = q;
            }
        }
    }
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    let unresolved = (rest.degree() > 0).then_some(rest);
    CharDecomposition { coeffs: coeffs.to_vec(), poly, roots, unresolved }
}

pub fn char_decompose(spec: &RecurrenceSpec) -> Result<CharDecomposition, LinError> {
    Ok(char_decompose_coeffs(&shift_coefficients(spec)?))
}

/// An exponential polynomial `p` with `p(n) - Σ a_i p(n - i) = forcing(n)`.
pub fn particular_solution(decomp: &CharDecomposition, forcing: &ExpPoly) -> Result<ExpPoly, LinError> {
    let rec = ConstCoeffRec { coeffs: decomp.coeffs.clone(), forcing: forcing.clone() };
    let mut out = ExpPoly::zero();
    for term in forcing.terms() {
        let alpha = term.base.clone();
        let m = decomp.multiplicity(&alpha) as usize;
        let d = term.degree();
        let images: Vec<ExpPoly> = (0..=d)
            .map(|j| rec.apply(&ExpPoly::monomial(Coef::one(), m + j, alpha.clone())))
            .collect::<Result<_, _>>()?;
        let matrix: Vec<Vec<Quad>> = (0..=d)
            .map(|i| {
                images
                    .iter()
                    .map(|img| img.coeff(&alpha, i).as_quad().expect("numeric operator image"))
                    .collect()
            })
            .collect();
        let rhs: Vec<Coef> = (0..=d).map(|i| term.coeff(i)).collect();
        let LinearOutcome::Solved(cs) = solve(matrix, rhs)? else {
            return Err(LinError::SingularSystem);
        };
        for (j, c) in cs.into_iter().enumerate() {
            out = out.try_add(&ExpPoly::monomial(c, m + j, alpha.clone()))?;
        }
    }
    Ok(out)
}

/// Homogeneous basis `n^j·r^n`.
pub fn homogeneous_basis(decomp: &CharDecomposition) -> Vec<ExpPoly> {
    let mut basis = Vec::new();
    for (r, m) in &decomp.roots {
        for j in 0..*m as usize {
            basis.push(ExpPoly::monomial(Coef::one(), j, r.clone()));
        }
    }
    basis
}

/// Name of the symbol standing for an unspecified initial value.
pub fn initial_symbol(unknown: &str, k: i64) -> String {
    if k >= 0 {
        format!("{unknown}{k}")
    } else {
        format!("{unknown}_m{}", -k)
    }
}

/// Fits `particular + Σ c_b·basis_b` to the values at `start..start+order`.
pub fn apply_initial_conditions(
    decomp: &CharDecomposition,
    particular: &ExpPoly,
    start: i64,
    values: &[Coef],
) -> Result<ExpPoly, LinError> {
    let basis = homogeneous_basis(decomp);
    if basis.len() != values.len() {
        return Err(LinError::SingularSystem);
    }
    let mut matrix = Vec::new();
    let mut rhs = Vec::new();
    for (i, v) in values.iter().enumerate() {
        let k = start + i as i64;
        let row: Vec<Quad> = basis
            .iter()
            .map(|b| b.value_coef(k).as_quad().expect("numeric basis"))
            .collect::<Vec<_>>();
        matrix.push(row);
        rhs.push(v.try_add(&particular.value_coef(k).neg())?);
    }
    if rank(matrix.clone())? < basis.len() {
        return Err(LinError::SingularSystem);
    }
    let LinearOutcome::Solved(cs) = solve(matrix, rhs)? else {
        return Err(LinError::SingularSystem);
    };
    let mut out = particular.clone();
    for (b, c) in basis.iter().zip(cs) {
        out = out.try_add(&b.try_scale(&c)?)?;
    }
    Ok(out)
}

/// A closed form valid for `n >= valid_from`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSolution {
    pub closed: ExpPoly,
    pub valid_from: i64,
    /// Initial values that were left symbolic because none was given.
    pub free_initials: Vec<String>,
}

/// Integer initial values of a univariate spec, by index.
pub fn integer_initials(ics: &IcMap) -> BTreeMap<i64, Expr> {
    ics.iter()
        .filter_map(|(k, v)| match k.as_slice() {
            [IcIndex::Int(i)] => Some((*i, v.clone())),
            _ => None,
        })
        .collect()
}

/// Solves a constant-coefficient recurrence exactly.
///
/// The fit uses the `order` consecutive initial values that start at the
/// smallest given index (or 0); missing values become symbols `x0, x1, …`.
/// Extra values at later indices move the fit to the highest block.
pub fn solve_const_coeff(spec: &RecurrenceSpec) -> Result<LinearSolution, LinError> {
    let rec = ConstCoeffRec::from_spec(spec)?;
    let decomp = char_decompose_coeffs(&rec.coeffs);
    if let Some(u) = &decomp.unresolved {
        return Err(LinError::Unresolved(u.to_expr("t").to_string()));
    }
    let part = particular_solution(&decomp, &rec.forcing)?;
    let ics = integer_initials(&spec.initial_conditions);
    let order = rec.order() as i64;
    let first = ics.keys().next().copied().unwrap_or(0);
    let last = ics.keys().next_back().copied().unwrap_or(first);
    let start = if last >= first + order { last - order + 1 } else { first };
    let mut free = Vec::new();
    let mut values = Vec::new();
    for k in start..start + order {
        let v = match ics.get(&k) {
            Some(e) => Coef::atom(e),
            None => {
                let name = initial_symbol(&spec.unknown, k);
                let c = Coef::atom(&Expr::sym(&name));
                free.push(name);
                c
            }
        };
        values.push(v);
    }
    let closed = apply_initial_conditions(&decomp, &part, start, &values)?;
    Ok(LinearSolution { closed, valid_from: start, free_initials: free })
}

/// Gcd of the shifts of a constant-coefficient recurrence.
pub fn shift_gcd(coeffs: &[Rat]) -> i64 {
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, a)| !a.is_zero())
        .map(|(i, _)| i as i64 + 1)
        .fold(0, num_integer::gcd)
}

/// Splits `x(n)` into `g` interleaved recurrences `y_r(m) = x(g·m + r)`,
/// `r = 0..g`, written in the index variable `m`.
pub fn order_reduce(spec: &RecurrenceSpec) -> Result<Vec<(RecurrenceSpec, i64)>, LinError> {
    let coeffs = shift_coefficients(spec)?;
    let g = shift_gcd(&coeffs);
    if g <= 1 {
        return Err(LinError::NotReducible);
    }
    let var = spec.var();
    let m = if var == "m" { "m_".to_string() } else { "m".to_string() };
    let mv = Expr::sym(&m);
    let ics = integer_initials(&spec.initial_conditions);
    let mut out = Vec::new();
    for r in 0..g {
        let n_of_m = Expr::int(g) * mv.clone() + Expr::int(r);
        let mut rhs = vec![spec.forcing.subs(var, &n_of_m)];
        for (i, a) in coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let step = (i as i64 + 1) / g;
            rhs.push(Expr::Const(a.clone()) * Expr::unknown(&spec.unknown, vec![mv.clone() - Expr::int(step)]));
        }
        let mut sub = RecurrenceSpec::new(&spec.unknown, vec![m.clone()], &Expr::Add(rhs), &[spec.unknown.clone()]);
        for (k, v) in &ics {
            if (k - r).rem_euclid(g) == 0 {
                sub.initial_conditions.insert(vec![IcIndex::Int((k - r).div_euclid(g))], v.clone());
            }
        }
        out.push((sub, r));
    }
    Ok(out)
}

/// Derives a recurrence in `target` alone by substituting the definitions
/// of the other unknowns, with initial values computed from the system.
pub fn eliminate_system(sys: &RecurrenceSystem, target: &str) -> Result<RecurrenceSpec, LinError> {
    let eq = sys.equation(target).ok_or_else(|| LinError::NotEliminable(format!("no equation for {target}")))?;
    let var = eq.var().to_string();
    let bound: i64 = sys
        .equations
        .iter()
        .map(|e| e.rhs_max_shift())
        .sum::<i64>()
        .max(1)
        * sys.equations.len() as i64;
    let mut rhs = eq.rhs.clone();
    let mut deepest = 0i64;
    let mut valid_from = 0i64;
    for _ in 0..=bound {
        let mut changed = false;
        let mut failure = None;
        rhs = rhs.map_unknowns(&mut |name, args| {
            let d = normalize(&(Expr::sym(&var) - args[0].clone())).as_rat().and_then(|r| r.to_i64());
            let Some(d) = d else {
                failure = Some(format!("argument {} of {name}", args[0]));
                return None;
            };
            deepest = deepest.max(d);
            if name == target {
                return None;
            }
            let def = sys.equation(name)?;
            // the rule for `name` applies only past its last given value
            if let Some(last) = integer_initials(&def.initial_conditions).keys().next_back() {
                valid_from = valid_from.max(d + last + 1);
            }
            changed = true;
            // definition at n - d, shifted arguments accumulate
            let shifted = def.rhs.subs(&var, &args[0]);
            Some(shifted)
        });
        if let Some(f) = failure {
            return Err(LinError::NotEliminable(f));
        }
        rhs = normalize(&rhs);
        if !changed {
            break;
        }
    }
    let mut others = false;
    rhs.visit(&mut |e| {
        if let Expr::Unknown(n, _) = e {
            others |= n != target;
        }
    });
    if others {
        return Err(LinError::NotEliminable(format!("substitution did not close within {bound} steps")));
    }
    let mut spec = RecurrenceSpec::new(target, vec![var.clone()], &rhs, &[target.to_string()]);
    if !spec.initial_conditions.is_empty() || spec.irregular.is_some() {
        return Err(LinError::NotEliminable("irregular derived recurrence".into()));
    }
    // the derived equation holds once every substituted index is defined
    let own_last = integer_initials(&eq.initial_conditions).keys().next_back().map_or(0, |k| k + 1);
    let needed = deepest.max(spec.order()).max(valid_from).max(own_last);
    let mut memo = BTreeMap::new();
    for k in 0..needed {
        let v = symbolic_value(sys, target, k, &mut memo, 0)?;
        spec.initial_conditions.insert(vec![IcIndex::Int(k)], v);
    }
    Ok(spec)
}

fn symbolic_value(
    sys: &RecurrenceSystem,
    name: &str,
    k: i64,
    memo: &mut BTreeMap<(String, i64), Expr>,
    depth: usize,
) -> Result<Expr, LinError> {
    if let Some(v) = memo.get(&(name.to_string(), k)) {
        return Ok(v.clone());
    }
    let eq = sys.equation(name).ok_or_else(|| LinError::NotEliminable(format!("no equation for {name}")))?;
    let value = if let Some(v) = eq.initial_conditions.get(&vec![IcIndex::Int(k)]) {
        v.clone()
    } else if k < 0
        || depth > 10_000
        || eq.initial_conditions.keys().any(|i| matches!(i.as_slice(), [IcIndex::Int(j)] if *j > k))
    {
        return Err(LinError::NotEliminable(format!("{name}({k}) is undefined")));
    } else if eq.initial_conditions.is_empty() && k == 0 && !eq.shift_terms.is_empty() {
        Expr::sym(&initial_symbol(name, 0))
    } else {
        let at = eq.rhs.subs(eq.var(), &Expr::int(k));
        let mut err = None;
        let e = at.map_unknowns(&mut |n, args| {
            let idx = normalize(&args[0]).as_rat().and_then(|r| r.to_i64());
            match idx.map(|i| symbolic_value(sys, n, i, memo, depth + 1)) {
                Some(Ok(v)) => Some(v),
                Some(Err(e)) => {
                    err = Some(e);
                    None
                }
                None => None,
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        normalize(&e)
    };
    memo.insert((name.to_string(), k), value.clone());
    Ok(value)
}

impl RecurrenceSpec {
    /// Largest backward offset among all unknowns on the right-hand side.
    pub fn rhs_max_shift(&self) -> i64 {
        let own = self.shift_terms.keys().filter_map(Shift::order);
        let cross = self.cross_terms.values().flat_map(|m| m.keys().filter_map(Shift::order));
        own.chain(cross).max().unwrap_or(0)
    }
}

/// Closed form as an expression in the spec's index variable.
pub fn to_expr(sol: &LinearSolution, var: &str) -> Expr {
    sol.closed.to_expr(var)
}
