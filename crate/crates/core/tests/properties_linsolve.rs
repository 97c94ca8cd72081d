mod common;
#[path = "common/pt.rs"]
mod pt;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use recsolve::exprcore::eval::bindings;
use recsolve::exprcore::{eval_exact, Bindings, Rat};
use recsolve::linsolve::{eliminate_system, order_reduce, solve_const_coeff, to_expr};
use recsolve::recmodel::{RecurrenceSpec, RecurrenceSystem};
use recsolve::verify::{check_solution_symbolic, iterate_oracle, iterate_system, Verdict};

use common::{coefficients_from_roots, lit, linear_instance, small_rat, spec, system};

fn assert_matches_oracle(s: &RecurrenceSpec, n_max: i64, label: &str) {
    let sol = solve_const_coeff(s).unwrap_or_else(|e| panic!("{label}: {e}"));
    let none = Bindings::new();
    let table = iterate_oracle(s, &none, n_max).unwrap();
    for (idx, v) in &table.points {
        let n = idx[0].to_i64().unwrap();
        if n >= sol.valid_from {
            assert_eq!(&sol.closed.eval_rat(n, &none).unwrap(), v, "{label} at n = {n}");
        }
    }
}

#[test]
fn random_constant_coefficient_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x11ea_0001);
    let mut resonant = 0;
    for i in 0..200 {
        let inst = linear_instance(&mut rng);
        let s = spec(&inst.text, &inst.ics);
        let label = format!("#{i} {} with {}", inst.text, inst.ics);
        assert_matches_oracle(&s, 50, &label);
        if inst.resonant {
            resonant += 1;
            let closed = to_expr(&solve_const_coeff(&s).unwrap(), "n");
            assert_eq!(check_solution_symbolic(&s, &closed), Verdict::Certified, "{label}");
        }
    }
    assert!(resonant >= 20, "only {resonant} resonant instances");
}

#[test]
fn resonant_doubling() {
    let s = spec("x(n) = 2*x(n-1) + 2^n", "x(0)=1");
    let closed = to_expr(&solve_const_coeff(&s).unwrap(), "n");
    assert_eq!(check_solution_symbolic(&s, &closed), Verdict::Certified);
    assert_matches_oracle(&s, 50, "doubling");
}

proptest! {
    #![proptest_config(pt::config(40))]

    #[test]
    fn order_reduction_interleaves(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = rng.gen_range(2..=3i64);
        // rational roots for each interleaved sub-recurrence
        let roots = [small_rat(&mut rng, 3, 2), Rat::new(rng.gen_range(1..=3), rng.gen_range(1..=2))];
        let ab = coefficients_from_roots(&roots);
        let text = format!("x(n) = {}*x(n-{g}) + {}*x(n-{}) + {}*n + 1", lit(&ab[0]), lit(&ab[1]), 2 * g, lit(&small_rat(&mut rng, 3, 1)));
        let ics: Vec<String> = (0..2 * g).map(|k| format!("x({k})={}", lit(&small_rat(&mut rng, 5, 2)))).collect();
        let s = spec(&text, &ics.join("; "));
        let none = Bindings::new();
        let table = iterate_oracle(&s, &none, 40).unwrap();
        let subs = order_reduce(&s).unwrap();
        // a vanishing coefficient can widen the interleave
        let g = subs.len() as i64;
        for (sub, r) in subs {
            let sol = solve_const_coeff(&sub).unwrap();
            let closed = to_expr(&sol, &sub.index_vars[0]);
            for m in sol.valid_from..=(40 - r) / g {
                let v = eval_exact(&closed, &bindings([(sub.index_vars[0].as_str(), Rat::from(m))])).unwrap();
                prop_assert_eq!(Some(&v), table.at_n(g * m + r), "{} at n = {}", text, g * m + r);
            }
        }
    }

    #[test]
    fn elimination_preserves_target(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = || lit(&small_rat(&mut rng, 3, 2));
        let (a, b, d, e) = (c(), c(), c(), c());
        let p = rng.gen_range(1..=2);
        let q = rng.gen_range(1..=2);
        // every path out of y leads back to x, so substitution closes
        let text = if rng.gen_bool(0.5) {
            format!("x(n) = {a}*x(n-1) + {b}*y(n-{p}) + 2^n; y(n) = {d}*x(n-{q}) + n")
        } else {
            format!("x(n) = {a}*x(n-1) + {b}*y(n-{p}) + 2^n; y(n) = {d}*z(n-{q}) + n; z(n) = {e}*x(n-1) + 1")
        };
        let ics = if text.contains("z(") { "x(0)=1; x(1)=3; y(0)=0; y(1)=-1; z(0)=2; z(1)=1/2" } else { "x(0)=1; x(1)=3; y(0)=0; y(1)=-1" };
        let sys: RecurrenceSystem = system(&text, ics);
        let none = Bindings::new();
        let joint = iterate_system(&sys, &none, 40).unwrap();
        let reduced = eliminate_system(&sys, "x").unwrap();
        let table = iterate_oracle(&reduced, &none, 40).unwrap();
        for (idx, v) in &table.points {
            prop_assert_eq!(Some(v), joint["x"].at(idx), "{} at {}", text, idx[0]);
        }
    }
}

#[test]
fn paper_system_elimination() {
    let sys = system(
        "x(n) = x(n-1) + y(n-1) + 2^n; y(n) = z(n-1) + n - 1; z(n) = x(n-1) + 1",
        "x(0)=0; y(0)=0; z(0)=0",
    );
    let reduced = eliminate_system(&sys, "x").unwrap();
    let expected = spec("x(n) = x(n-1) + x(n-3) + 2^n + n - 1", "");
    assert_eq!(reduced.rhs, expected.rhs);
    let none = Bindings::new();
    let joint = iterate_system(&sys, &none, 40).unwrap();
    let table = iterate_oracle(&reduced, &none, 40).unwrap();
    assert_eq!(table.values(), joint["x"].values());
}
