//! Certification: exact iteration oracle, exponential-polynomial zero test,
//! symbolic solution checking and numeric bound checking.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::exprcore::interval::{eval_interval, DEFAULT_BITS};
use crate::exprcore::{eval_with, normalize, to_expoly, Bindings, EvalError, Expr, NotExpPoly, Rat};
use crate::recmodel::{IcIndex, RecurrenceSpec, RecurrenceSystem};
use crate::summation::{close_sums, telescope_sums};

/// Largest index sampled when a residual cannot be proved zero.
pub const SAMPLE_HORIZON: i64 = 50;

const MAX_DEPTH: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("missing initial condition for {0}")]
    MissingInitialCondition(String),
    #[error("symbolic parameter `{0}` has no binding")]
    SymbolicBlocked(String),
    #[error("evaluation failed: {0}")]
    Eval(EvalError),
    #[error("{0}")]
    Unsupported(String),
}

fn lift(e: EvalError) -> VerifyError {
    match e {
        EvalError::UnboundSymbol(s) => VerifyError::SymbolicBlocked(s),
        EvalError::UnknownCall(s) => VerifyError::MissingInitialCondition(s),
        other => VerifyError::Eval(other),
    }
}

/// Exact values of one unknown at the points visited by the oracle.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OracleTable {
    pub points: Vec<(Vec<Rat>, Rat)>,
}

impl OracleTable {
    pub fn values(&self) -> Vec<Rat> {
        self.points.iter().map(|(_, v)| v.clone()).collect()
    }

    pub fn last(&self) -> Option<&Rat> {
        self.points.last().map(|(_, v)| v)
    }

    pub fn at(&self, idx: &[Rat]) -> Option<&Rat> {
        self.points.iter().find(|(i, _)| i.as_slice() == idx).map(|(_, v)| v)
    }

    /// Value at a univariate integer index.
    pub fn at_n(&self, n: i64) -> Option<&Rat> {
        self.at(&[Rat::from(n)])
    }
}

/// Memoized evaluator over one or more recurrences.
struct Oracle<'a> {
    eqs: BTreeMap<String, &'a RecurrenceSpec>,
    bindings: Bindings,
    memo: BTreeMap<(String, Vec<Rat>), Rat>,
    floors: BTreeMap<String, Vec<i64>>,
}

impl<'a> Oracle<'a> {
    fn new(eqs: &[&'a RecurrenceSpec], bindings: &Bindings) -> Oracle<'a> {
        let mut floors = BTreeMap::new();
        for e in eqs {
            let dims = e.index_vars.len();
            let mut f = vec![i64::MAX; dims];
            for idx in e.initial_conditions.keys() {
                for (d, c) in idx.iter().enumerate().take(dims) {
                    if let IcIndex::Int(k) = c {
                        f[d] = f[d].min(*k);
                    }
                }
            }
            for v in f.iter_mut().filter(|v| **v == i64::MAX) {
                *v = 0;
            }
            floors.insert(e.unknown.clone(), f);
        }
        Oracle {
            eqs: eqs.iter().map(|e| (e.unknown.clone(), *e)).collect(),
            bindings: bindings.clone(),
            memo: BTreeMap::new(),
            floors,
        }
    }

    fn initial_value(&self, spec: &RecurrenceSpec, idx: &[Rat]) -> Result<Option<Rat>, VerifyError> {
        'ics: for (pattern, value) in &spec.initial_conditions {
            if pattern.len() != idx.len() {
                continue;
            }
            let mut b = self.bindings.clone();
            for (p, v) in pattern.iter().zip(idx) {
                match p {
                    IcIndex::Int(k) if Rat::from(*k) == *v => {}
                    IcIndex::Int(_) => continue 'ics,
                    IcIndex::Var(name) => {
                        b.insert(name.clone(), v.clone());
                    }
                }
            }
            return eval_with(value, &b, None).map(Some).map_err(lift);
        }
        Ok(None)
    }

    fn value(&mut self, name: &str, idx: &[Rat], depth: usize) -> Result<Rat, VerifyError> {
        let key = (name.to_string(), idx.to_vec());
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let spec = *self
            .eqs
            .get(name)
            .ok_or_else(|| VerifyError::Unsupported(format!("no equation for {name}")))?;
        let v = match self.initial_value(spec, idx)? {
            Some(v) => v,
            None => {
                let label = format!("{name}({})", idx.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", "));
                let floor = &self.floors[name];
                if idx.iter().zip(floor).any(|(v, f)| *v < Rat::from(*f)) || idx.iter().any(|v| !v.is_integer()) {
                    return Err(VerifyError::MissingInitialCondition(label));
                }
                if depth > MAX_DEPTH {
                    return Err(VerifyError::Unsupported(format!("recursion too deep at {label}")));
                }
                let mut b = self.bindings.clone();
                for (v, x) in spec.index_vars.iter().zip(idx) {
                    b.insert(v.clone(), x.clone());
                }
                let rhs = spec.rhs.clone();
                let mut failure: Option<VerifyError> = None;
                let mut lookup = |n: &str, args: &[Rat]| -> Result<Rat, EvalError> {
                    match self.value(n, args, depth + 1) {
                        Ok(v) => Ok(v),
                        Err(err) => {
                            let msg = err.to_string();
                            failure = Some(err);
                            Err(EvalError::UnknownCall(msg))
                        }
                    }
                };
                match eval_with(&rhs, &b, Some(&mut lookup)) {
                    Ok(v) => v,
                    Err(e) => return Err(failure.unwrap_or_else(|| lift(e))),
                }
            }
        };
        self.memo.insert(key, v.clone());
        Ok(v)
    }
}

/// Smallest index at which a univariate recurrence is iterated.
pub fn start_index(spec: &RecurrenceSpec) -> i64 {
    spec.initial_conditions
        .keys()
        .filter_map(|k| match k.as_slice() {
            [IcIndex::Int(i)] => Some(*i),
            _ => None,
        })
        .min()
        .unwrap_or(0)
}

/// Direct exact iteration.
///
/// Univariate recurrences yield indices `start..=n_max`; divide-and-conquer
/// recurrences yield `n0·β^k` for `k = 0..=n_max`; multivariate recurrences
/// yield the points of the grid `[0, n_max]^d` at which iteration is defined.
pub fn iterate_oracle(spec: &RecurrenceSpec, bindings: &Bindings, n_max: i64) -> Result<OracleTable, VerifyError> {
    let mut oracle = Oracle::new(&[spec], bindings);
    let mut table = OracleTable::default();
    if let Some(beta) = spec.divisor().cloned() {
        let n0 = start_index(spec);
        if n0 <= 0 {
            return Err(VerifyError::MissingInitialCondition(format!("{}(n0) with n0 >= 1", spec.unknown)));
        }
        let mut n = Rat::from(n0);
        for _ in 0..=n_max {
            let v = oracle.value(&spec.unknown, std::slice::from_ref(&n), 0)?;
            table.points.push((vec![n.clone()], v));
            n = n * beta.clone();
        }
        return Ok(table);
    }
    if spec.is_univariate() {
        for n in start_index(spec)..=n_max {
            let idx = vec![Rat::from(n)];
            let v = oracle.value(&spec.unknown, &idx, 0)?;
            table.points.push((idx, v));
        }
        return Ok(table);
    }
    let dims = spec.index_vars.len();
    let mut idx = vec![0i64; dims];
    let mut missing = None;
    loop {
        let point: Vec<Rat> = idx.iter().map(|&i| Rat::from(i)).collect();
        // points whose iteration leaves the initial region are skipped
        match oracle.value(&spec.unknown, &point, 0) {
            Ok(v) => table.points.push((point, v)),
            Err(VerifyError::MissingInitialCondition(m)) => {
                missing.get_or_insert(m);
            }
            Err(e) => return Err(e),
        }
        let mut d = dims;
        loop {
            if d == 0 {
                return match missing {
                    Some(m) if table.points.is_empty() => Err(VerifyError::MissingInitialCondition(m)),
                    _ => Ok(table),
                };
            }
            d -= 1;
            if idx[d] < n_max {
                idx[d] += 1;
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Iterates every unknown of a system over `0..=n_max`.
pub fn iterate_system(
    sys: &RecurrenceSystem,
    bindings: &Bindings,
    n_max: i64,
) -> Result<BTreeMap<String, OracleTable>, VerifyError> {
    let eqs: Vec<&RecurrenceSpec> = sys.equations.iter().collect();
    let mut oracle = Oracle::new(&eqs, bindings);
    let mut out: BTreeMap<String, OracleTable> = BTreeMap::new();
    for n in 0..=n_max {
        for e in &eqs {
            let idx = vec![Rat::from(n)];
            let v = oracle.value(&e.unknown, &idx, 0)?;
            out.entry(e.unknown.clone()).or_default().points.push((idx, v));
        }
    }
    Ok(out)
}

/// Whether `f` is identically zero as an exponential polynomial in `var`.
pub fn expoly_is_zero(f: &Expr, var: &str) -> Result<bool, NotExpPoly> {
    Ok(to_expoly(f, var)?.is_zero())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    /// Smallest failing index found.
    Refuted(i64),
    Unknown(String),
}

/// Simultaneous substitution of `args` for the index variables.
pub fn substitute_index(candidate: &Expr, vars: &[String], args: &[Expr]) -> Expr {
    let tmp: Vec<String> = (0..vars.len()).map(|i| format!("__idx{i}")).collect();
    let mut e = candidate.clone();
    for (v, t) in vars.iter().zip(&tmp) {
        e = e.subs(v, &Expr::sym(t));
    }
    for (t, a) in tmp.iter().zip(args) {
        e = e.subs(t, a);
    }
    e
}

/// `candidate - rhs[x := candidate]` for a single recurrence.
pub fn residual(spec: &RecurrenceSpec, candidate: &Expr) -> Expr {
    let vars = &spec.index_vars;
    let rhs = spec.rhs.map_unknowns(&mut |name, args| {
        (name == spec.unknown).then(|| substitute_index(candidate, vars, args))
    });
    let r = normalize(&(candidate.clone() - rhs));
    if spec.is_univariate() {
        normalize(&telescope_sums(&normalize(&close_sums(&r, spec.var())), spec.var()))
    } else {
        r
    }
}

/// Distinct small primes for the given parameters.
pub fn sample_bindings(params: &[String]) -> Bindings {
    const PRIMES: [i64; 10] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];
    params.iter().enumerate().map(|(i, p)| (p.clone(), Rat::from(PRIMES[i % PRIMES.len()] + 30 * (i / 10) as i64))).collect()
}

/// Sign of an expression at a point: `Some(true)` when provably nonzero,
/// `Some(false)` when exactly zero, `None` when undetermined.
fn nonzero_at(e: &Expr, b: &Bindings) -> Option<bool> {
    match eval_with(e, b, None) {
        Ok(v) => Some(!v.is_zero()),
        Err(_) => {
            let iv = eval_interval(e, b, DEFAULT_BITS * 2).ok()?;
            if iv.contains(&Rat::zero()) {
                None
            } else {
                Some(true)
            }
        }
    }
}

/// Initial conditions that `candidate` fails to reproduce, by first index.
fn initial_mismatch(spec: &RecurrenceSpec, candidate: &Expr, sample: &Bindings) -> Result<(), Verdict> {
    for (pattern, value) in &spec.initial_conditions {
        let args: Vec<Expr> = pattern
            .iter()
            .map(|p| match p {
                IcIndex::Int(k) => Expr::int(*k),
                IcIndex::Var(v) => Expr::sym(v),
            })
            .collect();
        let diff = normalize(&(substitute_index(candidate, &spec.index_vars, &args) - value.clone()));
        if diff.is_zero() {
            continue;
        }
        let witness = match pattern.first() {
            Some(IcIndex::Int(k)) => *k,
            _ => 0,
        };
        let var = spec.index_vars.iter().find(|v| diff.depends_on(v)).cloned().unwrap_or_else(|| spec.index_vars[0].clone());
        if let Ok(true) = expoly_is_zero(&diff, &var) {
            continue;
        }
        let mut b = sample.clone();
        for p in pattern {
            if let IcIndex::Var(v) = p {
                b.insert(v.clone(), Rat::from(1));
            }
        }
        return Err(match nonzero_at(&diff, &b) {
            Some(true) => Verdict::Refuted(witness),
            _ => Verdict::Unknown(format!("cannot decide the initial condition at {witness}")),
        });
    }
    Ok(())
}

/// Checks a closed form against the recurrence and its initial conditions.
pub fn check_solution_symbolic(spec: &RecurrenceSpec, candidate: &Expr) -> Verdict {
    let sample = sample_bindings(&spec.parameters());
    if let Err(v) = initial_mismatch(spec, candidate, &sample) {
        return v;
    }
    if let Some(beta) = spec.divisor().cloned() {
        return check_divide_and_conquer(spec, candidate, &beta, &sample);
    }
    let r = residual(spec, candidate);
    let var = spec.index_vars[0].clone();
    // multivariate: zero in the first index with the others as symbols
    let proved = expoly_is_zero(&r, &var);
    if let Ok(true) = proved {
        return Verdict::Certified;
    }
    if !spec.is_univariate() {
        return Verdict::Unknown("multivariate residual not proved zero".into());
    }
    let start = start_index(spec);
    let given: Vec<i64> = spec.initial_conditions.keys().filter_map(|k| match k.as_slice() {
        [IcIndex::Int(i)] => Some(*i),
        _ => None,
    }).collect();
    let first = start + spec.order().max(0);
    let mut undecided = false;
    for n in first..=SAMPLE_HORIZON {
        if given.contains(&n) {
            continue;
        }
        let mut b = sample.clone();
        b.insert(var.clone(), Rat::from(n));
        match nonzero_at(&r, &b) {
            Some(true) => return Verdict::Refuted(n),
            Some(false) => {}
            None => undecided = true,
        }
    }
    let why = match proved {
        Err(e) => format!("residual outside the exp-poly family ({}); no counterexample up to {SAMPLE_HORIZON}", e.0),
        Ok(_) => format!("residual not proved zero; no counterexample up to {SAMPLE_HORIZON}"),
    };
    Verdict::Unknown(if undecided { format!("{why}, some samples undecided") } else { why })
}

fn check_divide_and_conquer(spec: &RecurrenceSpec, candidate: &Expr, beta: &Rat, sample: &Bindings) -> Verdict {
    let n = spec.var();
    let n0 = start_index(spec).max(1);
    let at_level = |j: Expr| {
        Expr::Mul(vec![Expr::int(n0), Expr::pow(Expr::Const(beta.clone()), j)])
    };
    let k = "__level";
    let kv = Expr::sym(k);
    let here = candidate.subs(n, &at_level(kv.clone()));
    let rhs = spec.rhs.map_unknowns(&mut |name, _| {
        (name == spec.unknown).then(|| candidate.subs(n, &at_level(kv.clone() - Expr::one())))
    });
    let r = normalize(&(here - rhs.subs(n, &at_level(kv.clone()))));
    if let Ok(true) = expoly_is_zero(&r, k) {
        return Verdict::Certified;
    }
    for level in 1..=SAMPLE_HORIZON {
        let mut b = sample.clone();
        b.insert(k.to_string(), Rat::from(level));
        if let Some(true) = nonzero_at(&r, &b) {
            let at = Rat::from(n0) * beta.pow(level);
            return Verdict::Refuted(at.to_i64().unwrap_or(i64::MAX));
        }
        if beta.pow(level) > Rat::from(1i64 << 40) {
            break;
        }
    }
    Verdict::Unknown("divide-and-conquer residual not proved zero".into())
}

/// Outcome of a sandwich check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundsReport {
    pub ok: bool,
    pub checked: usize,
    /// Index and a description of the first failing comparison.
    pub first_violation: Option<(Rat, String)>,
}

/// `a <= b` decided exactly or by refined interval enclosures.
fn provably_le(a: &Expr, b: &Bindings, value: &Rat, lower: bool) -> Result<bool, VerifyError> {
    if let Ok(v) = eval_with(a, b, None) {
        return Ok(if lower { v <= *value } else { *value <= v });
    }
    let mut bits = DEFAULT_BITS;
    loop {
        let iv = eval_interval(a, b, bits).map_err(lift)?;
        if lower {
            if iv.hi <= *value {
                return Ok(true);
            }
            if iv.lo > *value {
                return Ok(false);
            }
        } else {
            if iv.lo >= *value {
                return Ok(true);
            }
            if iv.hi < *value {
                return Ok(false);
            }
        }
        if bits > 4096 {
            return Err(VerifyError::Unsupported("bound too close to decide".into()));
        }
        bits *= 2;
    }
}

/// Verifies `lower <= x <= upper` at every oracle point (for
/// divide-and-conquer recurrences, at `n0·β^k` for `k <= n_max`).
pub fn check_bounds_numeric(
    spec: &RecurrenceSpec,
    bindings: &Bindings,
    lower: &Expr,
    upper: &Expr,
    n_max: i64,
) -> Result<BoundsReport, VerifyError> {
    check_bounds_from(spec, bindings, lower, upper, n_max, i64::MIN)
}

/// [`check_bounds_numeric`] restricted to univariate indices `>= from`.
pub fn check_bounds_from(
    spec: &RecurrenceSpec,
    bindings: &Bindings,
    lower: &Expr,
    upper: &Expr,
    n_max: i64,
    from: i64,
) -> Result<BoundsReport, VerifyError> {
    let table = iterate_oracle(spec, bindings, n_max)?;
    let mut checked = 0;
    let from = Rat::from(from);
    for (idx, v) in table.points.iter().filter(|(idx, _)| idx.len() > 1 || idx[0] >= from) {
        let mut b = bindings.clone();
        for (var, x) in spec.index_vars.iter().zip(idx) {
            b.insert(var.clone(), x.clone());
        }
        if !provably_le(lower, &b, v, true)? {
            return Ok(BoundsReport {
                ok: false,
                checked,
                first_violation: Some((idx[0].clone(), format!("lower bound exceeds {v}"))),
            });
        }
        if !provably_le(upper, &b, v, false)? {
            return Ok(BoundsReport {
                ok: false,
                checked,
                first_violation: Some((idx[0].clone(), format!("upper bound below {v}"))),
            });
        }
        checked += 1;
    }
    Ok(BoundsReport { ok: true, checked, first_violation: None })
}
