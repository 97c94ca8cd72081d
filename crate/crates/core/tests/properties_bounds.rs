mod common;
#[path = "common/pt.rs"]
mod pt;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use recsolve::approxbounds::{expoly_sandwich, expoly_sandwich_with, lambda_is_sound};
use recsolve::dcbounds::{dc_bounds, dc_exact_on_powers};
use recsolve::exprcore::{eval_exact, Bindings, Rat};
use recsolve::linsolve::shift_coefficients;
use recsolve::recmodel::SolutionKind;
use recsolve::verify::{check_bounds_numeric, iterate_oracle};

use common::{dc_instance, nonneg_instance, spec};

/// Levels `k` with `β^k <= 2^12`.
fn levels(beta: &Rat) -> i64 {
    (0..=12).take_while(|&k| beta.pow(k) <= Rat::from(4096)).last().unwrap()
}

proptest! {
    #![proptest_config(pt::config(50))]

    #[test]
    fn dc_exact_at_powers(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (text, ics) = dc_instance(&mut rng);
        let s = spec(&text, &ics);
        let e = dc_exact_on_powers(&s).unwrap();
        let none = Bindings::new();
        for (idx, v) in iterate_oracle(&s, &none, 12).unwrap().points {
            let at: Bindings = [("n".to_string(), idx[0].clone())].into_iter().collect();
            prop_assert_eq!(eval_exact(&e, &at).unwrap(), v, "{} at n = {}", text, idx[0]);
        }
    }

    #[test]
    fn dc_sandwich(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (text, ics) = dc_instance(&mut rng);
        let s = spec(&text, &ics);
        let SolutionKind::Bounds { lower, upper } = dc_bounds(&s).unwrap().kind else { panic!("not bounds") };
        let report = check_bounds_numeric(&s, &Bindings::new(), &lower, &upper, levels(s.divisor().unwrap())).unwrap();
        prop_assert!(report.ok, "{}: {:?}", text, report.first_violation);
    }

    #[test]
    fn expoly_sandwich_holds(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (text, ics) = nonneg_instance(&mut rng);
        let s = spec(&text, &ics);
        let sb = expoly_sandwich(&s).unwrap();
        let coeffs = shift_coefficients(&s).unwrap();
        prop_assert!(lambda_is_sound(&coeffs, &sb.lambda));
        let none = Bindings::new();
        let report = check_bounds_numeric(&s, &none, &sb.lower("n"), &sb.upper("n"), 60).unwrap();
        prop_assert!(report.ok, "{}: {:?}", text, report.first_violation);
        // a larger λ stays valid
        let wider = &sb.lambda * &Rat::new(101, 100);
        prop_assert!(lambda_is_sound(&coeffs, &wider));
        let sw = expoly_sandwich_with(&s, &wider).unwrap();
        let report = check_bounds_numeric(&s, &none, &sw.lower("n"), &sw.upper("n"), 60).unwrap();
        prop_assert!(report.ok, "{} widened: {:?}", text, report.first_violation);
    }
}
