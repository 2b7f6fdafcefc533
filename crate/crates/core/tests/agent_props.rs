mod common;

use proptest::prelude::*;

use seqcontract::agent::{
    agent_utility, payment_ranks, perturb, principal_utility_for, reservation_value, weitzman_strategy,
};
use seqcontract::oracle::{enumerate_nonadaptive, oracle_best_response, DEFAULT_ORACLE_BUDGET};
use seqcontract::{principal_utility, rat, Contract, ExtendedRational, Rational};

fn excess(row: &[Rational], t: &[Rational], z: &Rational) -> Rational {
    row.iter()
        .zip(t)
        .map(|(p, x)| if x > z { p * (x - z) } else { Rational::zero() })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reservation_value_is_a_fixed_point((inst, t) in common::case(4, 4)) {
        for i in 0..inst.n() {
            match reservation_value(&inst, &t, i) {
                ExtendedRational::Finite(z) => {
                    prop_assert_eq!(&excess(&inst.probs()[i], &t.payments, &z), inst.cost(i));
                    // z is the affine form of the outcomes paying strictly more.
                    let above: Vec<usize> =
                        (0..inst.m()).filter(|&j| inst.prob(i, j).is_positive() && t.payments[j] > z).collect();
                    let mass: Rational = above.iter().map(|&j| inst.prob(i, j)).sum();
                    let paid: Rational = above.iter().map(|&j| inst.prob(i, j) * &t.payments[j]).sum();
                    prop_assert_eq!((paid - inst.cost(i)) / mass, z);
                }
                ExtendedRational::PosInfinity => prop_assert!(inst.cost(i).is_zero()),
            }
        }
    }

    #[test]
    fn reservation_values_move_less_than_payments(
        (inst, t) in common::case(4, 4),
        shifts in prop::collection::vec(-4i64..=4, 4),
        d in 1i64..=8,
    ) {
        let delta = rat(d, 8);
        let moved = Contract {
            payments: t.payments.iter().zip(&shifts).map(|(p, &s)| {
                let x = p + &delta * rat(s, 4);
                if x.is_negative() { Rational::zero() } else { x }
            }).collect(),
        };
        for i in 0..inst.n() {
            match (reservation_value(&inst, &t, i), reservation_value(&inst, &moved, i)) {
                (ExtendedRational::Finite(a), ExtendedRational::Finite(b)) => prop_assert!((a - b).abs() <= delta),
                (a, b) => prop_assert_eq!(a, b),
            }
        }
    }

    #[test]
    fn perturbing_shifts_agent_utility_by_principal_share(
        (inst, t) in common::case(3, 3),
        pick in any::<prop::sample::Index>(),
        e in 0i64..=32,
    ) {
        let all: Vec<_> = enumerate_nonadaptive(inst.n(), inst.m(), DEFAULT_ORACLE_BUDGET).unwrap().collect();
        let s = &all[pick.index(all.len())];
        let eps = rat(e, 32);
        let lhs = agent_utility(&inst, &perturb(&inst, &t, &eps), s);
        prop_assert_eq!(lhs, &eps * principal_utility_for(&inst, &t, s) + agent_utility(&inst, &t, s));
    }

    #[test]
    fn preference_follows_payment_order((inst, t) in common::case(4, 4)) {
        let s = weitzman_strategy(&inst, &t);
        prop_assert_eq!(&s.rho, &payment_ranks(&t.payments));
        for a in 0..inst.m() {
            for b in 0..inst.m() {
                if t.payments[a] < t.payments[b] {
                    prop_assert!(s.rho[a] < s.rho[b]);
                }
            }
        }
    }

    #[test]
    fn solver_agrees_with_oracle((inst, t) in common::case(3, 4)) {
        let (u, s) = principal_utility(&inst, &t);
        let report = oracle_best_response(&inst, &t, DEFAULT_ORACLE_BUDGET).unwrap();
        prop_assert_eq!(u, report.principal_utility);
        prop_assert!(report.maximizers.contains(&s));
        prop_assert_eq!(agent_utility(&inst, &t, &s), report.agent_utility);
    }
}
