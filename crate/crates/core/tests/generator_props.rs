use proptest::prelude::*;

use seqcontract::generators::{
    equal_spread_contract, equal_spread_utility, gen_partition_reduction, gen_random_instance, gen_superpoly_instance,
};
use seqcontract::{principal_utility, rat, validate_instance, Rational};

proptest! {
    #[test]
    fn random_instances_validate(n in 1usize..=6, m in 1usize..=6, seed in any::<u64>()) {
        let inst = gen_random_instance(n, m, seed).unwrap();
        let again = validate_instance(&inst.to_document()).unwrap();
        prop_assert!(again.is_identity());
        prop_assert_eq!(&again.instance, &inst);
        prop_assert_eq!(gen_random_instance(n, m, seed).unwrap(), inst);
    }
}

#[test]
fn one_tenth_uniquely_maximizes_equal_spread() {
    let a = [rat(1, 20), rat(1, 20), rat(1, 25), rat(3, 50)];
    let (_, params) = gen_partition_reduction(&a).unwrap();
    let best = equal_spread_utility(&params, &rat(1, 10));
    for k in 0..=1000 {
        if k != 500 {
            assert!(equal_spread_utility(&params, &rat(k, 5000)) < best, "x = {k}/5000");
        }
    }
}

#[test]
fn larger_partition_separates() {
    // Eight numbers summing to 1/5; the first four sum to 1/10.
    let yes: Vec<Rational> = [4, 1, 2, 3, 5, 1, 2, 2].iter().map(|&k| rat(k, 100)).collect();
    let (inst, params) = gen_partition_reduction(&yes).unwrap();
    let target = equal_spread_utility(&params, &rat(1, 10));
    let mut hit = false;
    for mask in 0u32..1 << yes.len() {
        let s: Vec<usize> = (0..yes.len()).filter(|j| mask >> j & 1 == 1).collect();
        let x: Rational = s.iter().map(|&j| &yes[j]).sum();
        let u = principal_utility(&inst, &equal_spread_contract(&params, &s)).0;
        assert_eq!(u, equal_spread_utility(&params, &x));
        assert!(u <= target);
        hit |= u == target;
    }
    assert!(hit);

    // All odd hundredths: no subset reaches ten.
    let no: Vec<Rational> = [3, 3, 3, 3, 3, 5].iter().map(|&k| rat(k, 100)).collect();
    let (inst, params) = gen_partition_reduction(&no).unwrap();
    let target = equal_spread_utility(&params, &rat(1, 10));
    for mask in 0u32..1 << no.len() {
        let s: Vec<usize> = (0..no.len()).filter(|j| mask >> j & 1 == 1).collect();
        assert!(principal_utility(&inst, &equal_spread_contract(&params, &s)).0 < target);
    }
}

#[test]
fn superpoly_takes_exactly_the_cheap_copies() {
    let fam = gen_superpoly_instance(6, 3).unwrap();
    assert_eq!(fam.ell, 3);
    for v in [[1, 3], [2, 2], [3, 1]] {
        let t = fam.t_v(&v).unwrap();
        let (_, s) = principal_utility(&fam.instance, &t);
        let d = seqcontract::agent::outcome_distribution(&fam.instance, &s);
        for (i, label) in fam.labels.iter().enumerate() {
            let (j, copy) = label.unwrap();
            assert_eq!(d.taken[i].is_positive(), copy <= v[j - 2], "v {v:?}, copy ({j}, {copy})");
        }
    }
}
