mod common;
#[path = "common/pt.rs"]
mod pt;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use recsolve::exprcore::eval::bindings;
use recsolve::exprcore::{eval_exact, normalize, to_expoly, Expr, Func, Poly, Rat};
use recsolve::recmodel::{parse, parse_expr};

use common::{lit, random_expoly, small_rat, spec, CORPUS};

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-5i64..=5).prop_map(Expr::int),
        (-5i64..=5, 1i64..=4).prop_map(|(a, b)| Expr::frac(a, b)),
        Just(Expr::sym("n")),
        Just(Expr::sym("a")),
    ]
}

fn tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Expr::Add),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Expr::Mul),
            (inner.clone(), 0i64..=3).prop_map(|(b, k)| Expr::powi(b, k)),
            (1i64..=3, inner.clone()).prop_map(|(b, x)| Expr::pow(Expr::int(b + 1), x)),
            (0i64..=3).prop_map(|k| Expr::factorial(Expr::sym("n") + Expr::int(k))),
            (1i64..=12).prop_map(|k| Expr::func(Func::Log, vec![Expr::int(k)])),
        ]
    })
}

/// An exp-poly written with shifted exponents and unexpanded powers.
fn scrambled_expoly(rng: &mut ChaCha8Rng) -> String {
    let mut terms = Vec::new();
    for _ in 0..rng.gen_range(1..=4) {
        let c = small_rat(rng, 6, 4);
        let shift = rng.gen_range(-2i64..=2);
        let d = rng.gen_range(0..=2);
        let base = [Rat::from(2), Rat::from(3), Rat::new(1, 2), Rat::one()][rng.gen_range(0..4)].clone();
        // c·b^(n+s)·(n+s)^d / b^s
        terms.push(format!(
            "{}*{}^(n + ({shift}))*(n + ({shift}))^{d}/{}^({shift})",
            lit(&c),
            lit(&base),
            lit(&base)
        ));
    }
    terms.join(" + ")
}

proptest! {
    #![proptest_config(pt::config(200))]

    #[test]
    fn normalize_is_idempotent(e in tree()) {
        let once = normalize(&e);
        prop_assert_eq!(normalize(&once), once);
    }

    #[test]
    fn normalize_preserves_values_on_expolys(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = parse_expr(&scrambled_expoly(&mut rng)).unwrap();
        let norm = normalize(&raw);
        for n in 0..=10 {
            let b = bindings([("n", Rat::from(n))]);
            prop_assert_eq!(eval_exact(&raw, &b).unwrap(), eval_exact(&norm, &b).unwrap());
        }
    }

    #[test]
    fn expoly_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xp = random_expoly(&mut rng);
        prop_assert_eq!(to_expoly(&xp.to_expr("n"), "n").unwrap(), xp);
    }

    #[test]
    fn root_enclosures_bracket(coeffs in prop::collection::vec(-6i64..=6, 2..=5), lead in 1i64..=3, width_bits in 1u32..=12) {
        // negative constant term and positive lead force a positive root
        let mut cs: Vec<i64> = coeffs;
        cs[0] = -cs[0].abs() - 1;
        cs.push(lead);
        let p = Poly::from_ints(&cs);
        let width = Rat::new(1, 1i64 << width_bits);
        let iv = p.isolate_positive_root(&width).unwrap();
        prop_assert!(&iv.hi - &iv.lo <= width);
        let (lo, hi) = (iv.poly.sign_at(&iv.lo), iv.poly.sign_at(&iv.hi));
        prop_assert!(iv.is_exact() && lo == 0 || lo * hi < 0, "signs {} {}", lo, hi);
        prop_assert_eq!(iv.poly.count_roots_above(&iv.hi), 0);
    }
}

#[test]
fn paper_root_enclosure() {
    let p = Poly::from_ints(&[-1, 0, -1, 1]);
    let iv = p.isolate_positive_root(&Rat::new(1, 1000)).unwrap();
    assert!(p.sign_at(&iv.lo) < 0 && p.sign_at(&iv.hi) > 0);
    assert!(iv.lo >= Rat::new(1465, 1000) && iv.hi <= Rat::new(1467, 1000));
}

#[test]
fn render_round_trip_on_corpus() {
    for (text, _) in CORPUS {
        let p = parse(text).unwrap();
        let again = parse(&p.render()).unwrap();
        assert_eq!(again, p, "{text}");
    }
}

#[test]
fn repeated_terms_collect() {
    assert_eq!(spec("x(n)=x(n-1)+x(n-1)", ""), spec("x(n)=2*x(n-1)", ""));
}
