//! Recurrence data model: normalized specs, systems, initial conditions and
//! solutions.

mod parse;

use std::collections::BTreeMap;
use std::fmt;

use crate::exprcore::{normalize, Expr, Func, Rat};

pub use parse::{parse, parse_expr, parse_initial_conditions, ParseError};

/// How an occurrence of the unknown relates to the current index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Shift {
    /// `x(n_1 - d_1, ..., n_k - d_k)`; never all zero.
    Offset(Vec<i64>),
    /// `x(n / β)` with `β > 1`.
    Divide(Rat),
}

impl Shift {
    /// Backward shift of a univariate offset.
    pub fn order(&self) -> Option<i64> {
        match self {
            Shift::Offset(d) if d.len() == 1 => Some(d[0]),
            _ => None,
        }
    }

    /// The argument list this shift denotes for the given index variables.
    pub fn args(&self, vars: &[String]) -> Vec<Expr> {
        match self {
            Shift::Offset(d) => vars
                .iter()
                .zip(d)
                .map(|(v, k)| normalize(&(Expr::sym(v) - Expr::int(*k))))
                .collect(),
            Shift::Divide(b) => vec![normalize(&(Expr::sym(&vars[0]) / Expr::Const(b.clone())))],
        }
    }
}

/// One component of an initial-condition index: a literal or an index
/// variable (for patterns such as `x(0, n) = 9`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IcIndex {
    Int(i64),
    Var(String),
}

impl fmt::Display for IcIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IcIndex::Int(k) => write!(f, "{k}"),
            IcIndex::Var(v) => write!(f, "{v}"),
        }
    }
}

pub type IcMap = BTreeMap<Vec<IcIndex>, Expr>;

/// Initial conditions grouped by unknown.
pub type InitialConditions = BTreeMap<String, IcMap>;

/// A single normalized recurrence `x(vars) = rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecurrenceSpec {
    pub unknown: String,
    pub index_vars: Vec<String>,
    /// Normalized right-hand side.
    pub rhs: Expr,
    /// Linear occurrences of the unknown, coefficient per shift.
    pub shift_terms: BTreeMap<Shift, Expr>,
    /// Linear occurrences of other unknowns (systems only).
    pub cross_terms: BTreeMap<String, BTreeMap<Shift, Expr>>,
    /// Terms free of unknowns.
    pub forcing: Expr,
    /// Coefficient of `sum(x(k), k, 0, n - 1)`.
    pub prefix_sum_coeff: Option<Expr>,
    /// The unknown occurs non-linearly (powers, products, inside functions).
    pub nonlinear: bool,
    /// Shape outside the supported grammar, with a reason.
    pub irregular: Option<String>,
    pub initial_conditions: IcMap,
}

/// Several recurrences over one index variable with distinct unknowns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecurrenceSystem {
    pub equations: Vec<RecurrenceSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Problem {
    Single(RecurrenceSpec),
    System(RecurrenceSystem),
}

impl RecurrenceSpec {
    /// Decomposes `rhs` into shift terms, prefix sum and forcing.
    pub fn new(unknown: &str, index_vars: Vec<String>, rhs: &Expr, all_unknowns: &[String]) -> RecurrenceSpec {
        let rhs = normalize(rhs);
        let mut spec = RecurrenceSpec {
            unknown: unknown.to_string(),
            index_vars,
            rhs: rhs.clone(),
            shift_terms: BTreeMap::new(),
            cross_terms: BTreeMap::new(),
            forcing: Expr::zero(),
            prefix_sum_coeff: None,
            nonlinear: false,
            irregular: None,
            initial_conditions: IcMap::new(),
        };
        let terms = match &rhs {
            Expr::Add(ts) => ts.clone(),
            other => vec![other.clone()],
        };
        let mut forcing = Vec::new();
        let mut own: BTreeMap<Shift, Vec<Expr>> = BTreeMap::new();
        let mut cross: BTreeMap<String, BTreeMap<Shift, Vec<Expr>>> = BTreeMap::new();
        let mut prefix = Vec::new();
        for t in terms {
            if !t.contains_unknown() {
                forcing.push(t);
                continue;
            }
            let factors = match &t {
                Expr::Mul(fs) => fs.clone(),
                other => vec![other.clone()],
            };
            let (with, without): (Vec<Expr>, Vec<Expr>) = factors.into_iter().partition(|f| f.contains_unknown());
            let coeff = normalize(&Expr::Mul(without));
            if with.len() != 1 {
                spec.nonlinear = true;
                continue;
            }
            match &with[0] {
                Expr::Unknown(name, args) => match spec.shift_of(args) {
                    Ok(shift) => {
                        if name == unknown {
                            own.entry(shift).or_default().push(coeff);
                        } else if all_unknowns.contains(name) {
                            cross.entry(name.clone()).or_default().entry(shift).or_default().push(coeff);
                        }
                    }
                    Err(reason) => spec.irregular = Some(reason),
                },
                Expr::Func(Func::Sum, args) if args.len() == 4 && args[0].contains_unknown() => {
                    if spec.is_prefix_sum(args) {
                        prefix.push(coeff);
                    } else {
                        spec.irregular = Some("unsupported sum over the unknown".into());
                    }
                }
                _ => spec.nonlinear = true,
            }
        }
        spec.forcing = normalize(&Expr::Add(forcing));
        for (shift, cs) in own {
            let c = normalize(&Expr::Add(cs));
            if !c.is_zero() {
                spec.shift_terms.insert(shift, c);
            }
        }
        for (name, m) in cross {
            let mut out = BTreeMap::new();
            for (shift, cs) in m {
                let c = normalize(&Expr::Add(cs));
                if !c.is_zero() {
                    out.insert(shift, c);
                }
            }
            if !out.is_empty() {
                spec.cross_terms.insert(name, out);
            }
        }
        if !prefix.is_empty() {
            let c = normalize(&Expr::Add(prefix));
            if !c.is_zero() {
                spec.prefix_sum_coeff = Some(c);
            }
        }
        if spec.shift_terms.contains_key(&Shift::Offset(vec![0; spec.index_vars.len()])) {
            spec.irregular = Some("the unknown appears at the current index on the right-hand side".into());
        }
        spec
    }

    fn shift_of(&self, args: &[Expr]) -> Result<Shift, String> {
        if args.len() != self.index_vars.len() {
            return Err(format!("{} used with {} arguments", self.unknown, args.len()));
        }
        let mut deltas = Vec::with_capacity(args.len());
        for (a, v) in args.iter().zip(&self.index_vars) {
            let diff = normalize(&(Expr::sym(v) - a.clone()));
            if let Some(k) = diff.as_rat().and_then(|r| r.to_i64()) {
                deltas.push(k);
                continue;
            }
            if args.len() == 1 {
                // n / β
                let ratio = normalize(&(Expr::sym(v) / a.clone()));
                if let Some(beta) = ratio.as_rat() {
                    if *beta > Rat::one() {
                        return Ok(Shift::Divide(beta.clone()));
                    }
                }
            }
            return Err(format!("unsupported argument `{a}`"));
        }
        Ok(Shift::Offset(deltas))
    }

    fn is_prefix_sum(&self, args: &[Expr]) -> bool {
        if self.index_vars.len() != 1 {
            return false;
        }
        let n = Expr::sym(&self.index_vars[0]);
        let Expr::Sym(k) = &args[1] else { return false };
        let body_ok = matches!(&args[0], Expr::Unknown(u, a) if *u == self.unknown && a.len() == 1 && a[0] == Expr::sym(k));
        body_ok
            && args[2].is_zero()
            && normalize(&(args[3].clone() - (n - Expr::one()))).is_zero()
    }

    pub fn is_univariate(&self) -> bool {
        self.index_vars.len() == 1
    }

    pub fn var(&self) -> &str {
        &self.index_vars[0]
    }

    /// Largest backward offset of a univariate linear recurrence.
    pub fn order(&self) -> i64 {
        self.shift_terms.keys().filter_map(Shift::order).max().unwrap_or(0)
    }

    pub fn divisor(&self) -> Option<&Rat> {
        self.shift_terms.keys().find_map(|s| match s {
            Shift::Divide(b) => Some(b),
            _ => None,
        })
    }

    /// Literal initial value at a univariate index.
    pub fn ic_at(&self, k: i64) -> Option<&Expr> {
        self.initial_conditions.get(&vec![IcIndex::Int(k)])
    }

    /// Symbols that are neither index variables nor bound inside sums.
    pub fn parameters(&self) -> Vec<String> {
        let mut syms = self.rhs.free_symbols();
        for v in self.initial_conditions.values() {
            syms.extend(v.free_symbols());
        }
        for v in &self.index_vars {
            syms.remove(v);
        }
        syms.into_iter().collect()
    }

    pub fn render(&self) -> String {
        format!("{}({}) = {}", self.unknown, self.index_vars.join(", "), self.rhs)
    }

    pub fn render_initial_conditions(&self) -> String {
        render_ics(&self.unknown, &self.initial_conditions)
    }
}

pub fn render_ics(unknown: &str, ics: &IcMap) -> String {
    ics.iter()
        .map(|(idx, v)| {
            let idx: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
            format!("{unknown}({}) = {v}", idx.join(", "))
        })
        .collect::<Vec<_>>()
        .join("; ")
}

impl fmt::Display for RecurrenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl RecurrenceSystem {
    pub fn unknowns(&self) -> Vec<String> {
        self.equations.iter().map(|e| e.unknown.clone()).collect()
    }

    pub fn equation(&self, unknown: &str) -> Option<&RecurrenceSpec> {
        self.equations.iter().find(|e| e.unknown == unknown)
    }

    pub fn render(&self) -> String {
        self.equations.iter().map(|e| e.render()).collect::<Vec<_>>().join("; ")
    }
}

impl Problem {
    pub fn render(&self) -> String {
        match self {
            Problem::Single(s) => s.render(),
            Problem::System(s) => s.render(),
        }
    }

    /// Attaches initial conditions to the matching unknowns.
    pub fn with_initial_conditions(mut self, ics: &InitialConditions) -> Problem {
        match &mut self {
            Problem::Single(s) => {
                if let Some(m) = ics.get(&s.unknown) {
                    s.initial_conditions = m.clone();
                }
            }
            Problem::System(sys) => {
                for e in &mut sys.equations {
                    if let Some(m) = ics.get(&e.unknown) {
                        e.initial_conditions = m.clone();
                    }
                }
            }
        }
        self
    }
}

/// Outcome of a verification pass attached to a solution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verification {
    /// Largest index (or exponent, for divide-and-conquer) checked.
    pub checked_up_to: i64,
    pub ok: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolutionKind {
    Exact(Expr),
    /// One closed form per residue class of the index modulo `modulus`;
    /// branch `r` is written in terms of `m` with `n = modulus·m + r`.
    Piecewise { modulus: i64, branches: Vec<Expr> },
    Bounds { lower: Expr, upper: Expr },
    Unsolved(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub kind: SolutionKind,
    pub domain: String,
    pub assumptions: Vec<String>,
    pub verification: Option<Verification>,
}

impl Solution {
    pub fn exact(e: Expr, domain: impl Into<String>) -> Solution {
        Solution { kind: SolutionKind::Exact(e), domain: domain.into(), assumptions: Vec::new(), verification: None }
    }

    pub fn bounds(lower: Expr, upper: Expr, domain: impl Into<String>) -> Solution {
        Solution {
            kind: SolutionKind::Bounds { lower, upper },
            domain: domain.into(),
            assumptions: Vec::new(),
            verification: None,
        }
    }

    pub fn unsolved(reason: impl Into<String>) -> Solution {
        Solution {
            kind: SolutionKind::Unsolved(reason.into()),
            domain: String::new(),
            assumptions: Vec::new(),
            verification: None,
        }
    }

    pub fn with_assumptions(mut self, a: Vec<String>) -> Solution {
        self.assumptions = a;
        self
    }

    pub fn closed_form(&self) -> Option<&Expr> {
        match &self.kind {
            SolutionKind::Exact(e) => Some(e),
            _ => None,
        }
    }

    pub fn is_unsolved(&self) -> bool {
        matches!(self.kind, SolutionKind::Unsolved(_))
    }
}
