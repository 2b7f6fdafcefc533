use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use seqcontract::correlated::{brute_force_best_linear, hardness_reduction, perfect_cover};
use seqcontract::generators::{gen_critpoints_instance, gen_random_contract, gen_random_instance};
use seqcontract::oracle::{oracle_best_response, DEFAULT_ORACLE_BUDGET};
use seqcontract::{principal_utility, rat, solve_general, solve_linear};

fn best_response(c: &mut Criterion) {
    let mut group = c.benchmark_group("principal_utility");
    for n in [4usize, 16, 64] {
        let inst = gen_random_instance(n, 6, n as u64).unwrap();
        let t = gen_random_contract(&inst, &mut ChaCha8Rng::seed_from_u64(1));
        group.bench_with_input(BenchmarkId::from_parameter(n), &(inst, t), |b, (inst, t)| {
            b.iter(|| principal_utility(black_box(inst), black_box(t)))
        });
    }
    group.finish();

    let inst = gen_random_instance(3, 4, 11).unwrap();
    let t = gen_random_contract(&inst, &mut ChaCha8Rng::seed_from_u64(2));
    c.bench_function("oracle_best_response/n3_m4", |b| {
        b.iter(|| oracle_best_response(black_box(&inst), black_box(&t), DEFAULT_ORACLE_BUDGET).unwrap())
    });
}

fn linear(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_linear");
    for m in [5usize, 20, 40] {
        let inst = gen_critpoints_instance(m).unwrap();
        group.bench_with_input(BenchmarkId::new("critpoints", m), &inst, |b, inst| b.iter(|| solve_linear(inst)));
    }
    let inst = gen_random_instance(10, 6, 5).unwrap();
    group.bench_function("random_n10_m6", |b| b.iter(|| solve_linear(black_box(&inst))));
    group.finish();
}

fn general(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_general");
    group.sample_size(10);
    for n in [1usize, 2, 3] {
        let inst = gen_random_instance(n, 3, 100 + n as u64).unwrap();
        group.bench_with_input(BenchmarkId::new("m3", n), &inst, |b, inst| {
            b.iter(|| solve_general(inst, u128::MAX).unwrap())
        });
    }
    group.finish();
}

fn correlated(c: &mut Criterion) {
    let ci = hardness_reduction(&perfect_cover(4), 4, &rat(1, 2)).unwrap();
    c.bench_function("brute_force_best_linear/k4", |b| b.iter(|| brute_force_best_linear(black_box(&ci), 7).unwrap()));
}

criterion_group!(benches, best_response, linear, general, correlated);
criterion_main!(benches);
