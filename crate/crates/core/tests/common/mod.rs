//! Seeded generators of random problem instances, shared by the property
//! suites and the acceptance target.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

use recsolve::exprcore::{Coef, ExpPoly, Quad, Rat};
use recsolve::recmodel::{parse, parse_initial_conditions, Problem, RecurrenceSpec, RecurrenceSystem};

pub fn spec(text: &str, ics: &str) -> RecurrenceSpec {
    match problem(text, ics) {
        Problem::Single(s) => s,
        Problem::System(_) => panic!("expected a single recurrence: {text}"),
    }
}

pub fn system(text: &str, ics: &str) -> RecurrenceSystem {
    match problem(text, ics) {
        Problem::System(s) => s,
        Problem::Single(_) => panic!("expected a system: {text}"),
    }
}

pub fn problem(text: &str, ics: &str) -> Problem {
    let p = parse(text).unwrap_or_else(|e| panic!("{text}: {e}"));
    p.with_initial_conditions(&parse_initial_conditions(ics).unwrap_or_else(|e| panic!("{ics}: {e}")))
}

/// A parenthesized rational literal.
pub fn lit(r: &Rat) -> String {
    format!("({r})")
}

pub fn small_rat<R: Rng>(rng: &mut R, num: i64, den: i64) -> Rat {
    Rat::new(rng.gen_range(-num..=num), rng.gen_range(1..=den))
}

pub fn nonneg_rat<R: Rng>(rng: &mut R, num: i64, den: i64) -> Rat {
    Rat::new(rng.gen_range(0..=num), rng.gen_range(1..=den))
}

/// `c·n^j·b^n` terms rendered in the variable `var`.
fn expoly_text(terms: &[(Rat, u32, Rat)], var: &str) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    terms
        .iter()
        .map(|(c, j, b)| format!("{}*{var}^{j}*{}^{var}", lit(c), lit(b)))
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Coefficients `a_1..a_d` of `Π (t - r_i)` written as `t^d - Σ a_i t^(d-i)`.
pub fn coefficients_from_roots(roots: &[Rat]) -> Vec<Rat> {
    // monic polynomial coefficients, highest degree first
    let mut p = vec![Rat::one()];
    for r in roots {
        let mut next = vec![Rat::zero(); p.len() + 1];
        for (i, c) in p.iter().enumerate() {
            next[i] = &next[i] + c;
            next[i + 1] = &next[i + 1] - &(c * r);
        }
        p = next;
    }
    p[1..].iter().map(|c| -c.clone()).collect()
}

/// A constant-coefficient recurrence with rational characteristic roots,
/// exp-poly forcing (sometimes resonant) and rational initial values.
pub struct LinearInstance {
    pub text: String,
    pub ics: String,
    pub roots: Vec<Rat>,
    pub resonant: bool,
}

pub fn linear_instance<R: Rng>(rng: &mut R) -> LinearInstance {
    let pool: Vec<Rat> = [-3, -2, -1, 1, 2, 3]
        .iter()
        .map(|&k| Rat::from(k))
        .chain([Rat::new(1, 2), Rat::new(-1, 2), Rat::new(3, 2)])
        .collect();
    let order = rng.gen_range(1..=3);
    let roots: Vec<Rat> = (0..order).map(|_| pool.choose(rng).unwrap().clone()).collect();
    let coeffs = coefficients_from_roots(&roots);
    let mut terms = Vec::new();
    let mut resonant = false;
    for _ in 0..rng.gen_range(0..=2) {
        let base = if rng.gen_bool(0.4) {
            resonant = true;
            roots.choose(rng).unwrap().clone()
        } else {
            [Rat::one(), Rat::from(2), Rat::from(5), Rat::new(1, 3)].choose(rng).unwrap().clone()
        };
        let c = small_rat(rng, 5, 3);
        if !c.is_zero() {
            terms.push((c, rng.gen_range(0..=2), base));
        }
    }
    let mut rhs: Vec<String> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, a)| !a.is_zero())
        .map(|(i, a)| format!("{}*x(n-{})", lit(a), i + 1))
        .collect();
    rhs.push(expoly_text(&terms, "n"));
    let ics: Vec<String> = (0..order).map(|k| format!("x({k})={}", lit(&small_rat(rng, 9, 4)))).collect();
    LinearInstance { text: format!("x(n) = {}", rhs.join(" + ")), ics: ics.join("; "), roots, resonant }
}

/// `x(n) = a(n)·x(n-1) + b(n)` with `a` a polynomial of degree at most 2
/// that is positive for `n >= 1`.
pub fn var_coeff_instance<R: Rng>(rng: &mut R) -> (String, String) {
    let c0 = rng.gen_range(1..=3);
    let c1 = rng.gen_range(0..=2);
    let c2 = rng.gen_range(0..=1);
    let a = format!("({c0} + {c1}*n + {c2}*n^2)");
    let mut terms = Vec::new();
    for _ in 0..rng.gen_range(0..=2) {
        let base = [Rat::one(), Rat::from(2), Rat::new(1, 2)].choose(rng).unwrap().clone();
        terms.push((small_rat(rng, 4, 2), rng.gen_range(0..=1), base));
    }
    let x0 = small_rat(rng, 6, 3);
    (format!("x(n) = {a}*x(n-1) + {}", expoly_text(&terms, "n")), format!("x(0)={}", lit(&x0)))
}

/// `p(k)·b^k` with `b ≠ 0`.
pub fn hypergeometric_term<R: Rng>(rng: &mut R) -> String {
    let deg = rng.gen_range(0..=3);
    let poly: Vec<String> = (0..=deg).map(|j| format!("{}*k^{j}", lit(&small_rat(rng, 5, 3)))).collect();
    let base = [Rat::from(2), Rat::from(3), Rat::new(1, 2), Rat::from(-2), Rat::new(2, 3), Rat::one()]
        .choose(rng)
        .unwrap()
        .clone();
    format!("({})*{}^k", poly.join(" + "), lit(&base))
}

/// A constant-coefficient recurrence with non-negative coefficients,
/// non-negative forcing and non-negative initial values.
pub fn nonneg_instance<R: Rng>(rng: &mut R) -> (String, String) {
    let order = rng.gen_range(1..=3);
    let mut coeffs: Vec<i64> = (0..order).map(|_| rng.gen_range(0..=2)).collect();
    coeffs[order - 1] = rng.gen_range(1..=2);
    let mut rhs: Vec<String> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, a)| **a != 0)
        .map(|(i, a)| format!("{a}*x(n-{})", i + 1))
        .collect();
    for _ in 0..rng.gen_range(0..=2) {
        let c = nonneg_rat(rng, 4, 3);
        let j = rng.gen_range(0..=1);
        let b = [1, 2, 3].choose(rng).unwrap();
        rhs.push(format!("{}*n^{j}*{b}^n", lit(&c)));
    }
    let ics: Vec<String> = (0..order).map(|k| format!("x({k})={}", lit(&nonneg_rat(rng, 5, 2)))).collect();
    (format!("x(n) = {}", rhs.join(" + ")), ics.join("; "))
}

/// `x(n) = α·x(n/β) + g(n)` with `g` a non-negative-coefficient polynomial.
pub fn dc_instance<R: Rng>(rng: &mut R) -> (String, String) {
    let alpha = rng.gen_range(1..=8);
    let beta = *[2, 3].choose(rng).unwrap();
    let g: Vec<String> = (0..=rng.gen_range(0..=2)).map(|j| format!("{}*n^{j}", lit(&nonneg_rat(rng, 4, 2)))).collect();
    let x1 = nonneg_rat(rng, 5, 2);
    (format!("x(n) = {alpha}*x(n/{beta}) + {}", g.join(" + ")), format!("x(1)={}", lit(&x1)))
}

pub fn random_expoly<R: Rng>(rng: &mut R) -> ExpPoly {
    let bases = [Rat::one(), Rat::from(2), Rat::from(3), Rat::new(-1, 2), Rat::new(1, 3)];
    let mut xp = ExpPoly::zero();
    for _ in 0..rng.gen_range(0..=4) {
        let c = small_rat(rng, 6, 4);
        let d = rng.gen_range(0..=2);
        let b = bases.choose(rng).unwrap().clone();
        xp = xp.try_add(&ExpPoly::monomial(Coef::rat(c), d, Quad::rat(b))).unwrap();
    }
    xp
}

/// Recurrences accepted by the grammar, one per class.
pub const CORPUS: &[(&str, &str)] = &[
    ("x(n) = 5*x(n-1) - 6*x(n-2) + n^2", "x(0)=0; x(1)=1"),
    ("x(n) = n*x(n-1) + 2", "x(0)=0"),
    ("x(n) = 3*x(n-1)^2", "x(0)=2"),
    ("x(n) = n/2 + n*sum(x, k, 0, n-1)", ""),
    ("x(m, n) = a + x(m-1, n+1)", "x(0,n)=9"),
    ("x(n) = x(n-1) + x(n-2)", "x(0)=0; x(1)=1"),
    ("x(n) = x(n-1)", "x(0)=c"),
    ("x(n) = 7*x(n/2) + 9/2*n^2", "x(1)=1"),
    ("x(n) = 2*x(n/2) + n - 1", "x(1)=0"),
    ("x(n) = x(n-1) + x(n-3) + 2^n + n - 1", "x(0)=0; x(1)=0; x(2)=0"),
    ("x(n) = 2*x(n-1) + 2^n", "x(0)=1"),
    ("x(n) = 4*x(n-2) + 1", "x(0)=0; x(1)=1"),
    ("x(n) = sum(x, k, 0, n-1)", "x(0)=1"),
    ("x(m, n) = x(m-1, n-1) + 1", "x(0,n)=n"),
    ("x(n) = x(n-1) + y(n-1) + 2^n; y(n) = z(n-1) + n - 1; z(n) = x(n-1) + 1", "x(0)=0; y(0)=0; z(0)=0"),
];
