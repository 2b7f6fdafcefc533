mod common;

use proptest::prelude::*;

use seqcontract::linear::{candidate_alphas, reservation_pwl, PiecewiseLinearFn};
use seqcontract::model::induced_payments;
use seqcontract::oracle::{oracle_best_linear, DEFAULT_ORACLE_BUDGET};
use seqcontract::{principal_utility, rat, reservation_value, solve_linear, LinearContract};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pwl_matches_fixed_point(inst in common::instance(4, 4), k in 0i64..=60) {
        let alpha = rat(k, 60);
        let t = induced_payments(&LinearContract::new(alpha.clone()).unwrap(), &inst);
        for i in 0..inst.n() {
            prop_assert_eq!(reservation_pwl(&inst, i).eval(&alpha), reservation_value(&inst, &t, i));
        }
    }

    #[test]
    fn pwl_is_convex_and_continuous(inst in common::instance(4, 4)) {
        for i in 0..inst.n() {
            if let PiecewiseLinearFn::Segments(segs) = reservation_pwl(&inst, i) {
                prop_assert!(segs.len() <= inst.m());
                for w in segs.windows(2) {
                    prop_assert!(w[0].slope <= w[1].slope);
                    let at = w[0].end.clone().unwrap();
                    prop_assert_eq!(&at, &w[1].start);
                    prop_assert_eq!(w[0].at(&at), w[1].at(&at));
                }
            }
        }
    }

    #[test]
    fn best_response_is_constant_between_candidates(inst in common::instance(4, 4)) {
        let alphas = candidate_alphas(&inst);
        prop_assert!(alphas.contains(&rat(0, 1)));
        for w in alphas.windows(2) {
            let gap = &w[1] - &w[0];
            let at = |num: i64| {
                let a = &w[0] + &gap * rat(num, 4);
                principal_utility(&inst, &induced_payments(&LinearContract::new(a).unwrap(), &inst)).1
            };
            let mid = at(2);
            prop_assert_eq!(&at(1), &mid);
            prop_assert_eq!(&at(3), &mid);
        }
    }

    #[test]
    fn solver_matches_oracle(inst in common::instance(3, 4)) {
        let report = solve_linear(&inst);
        prop_assert_eq!((report.alpha, report.utility), oracle_best_linear(&inst, DEFAULT_ORACLE_BUDGET).unwrap());
    }
}
