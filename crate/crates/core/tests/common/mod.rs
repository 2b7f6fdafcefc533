#![allow(dead_code)]

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use seqcontract::generators::{gen_random_contract, gen_random_instance};
use seqcontract::{Contract, Instance};

/// A random instance with `n` and `m` in the given ranges, plus a contract.
pub fn case(max_n: usize, max_m: usize) -> impl Strategy<Value = (Instance, Contract)> {
    (1..=max_n, 1..=max_m, any::<u64>()).prop_map(|(n, m, seed)| {
        let inst = gen_random_instance(n, m, seed).unwrap();
        let t = gen_random_contract(&inst, &mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed));
        (inst, t)
    })
}

pub fn instance(max_n: usize, max_m: usize) -> impl Strategy<Value = Instance> {
    (1..=max_n, 1..=max_m, any::<u64>()).prop_map(|(n, m, seed)| gen_random_instance(n, m, seed).unwrap())
}
