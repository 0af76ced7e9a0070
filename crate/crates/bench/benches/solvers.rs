use cogjam_bench::table1_defender;
use cogjam_core::closed_form::TpChainSpec;
use cogjam_core::{
    solve_attack_division, solve_defense, solve_two_channel_defense, tp_chain_stationary, AttackProbability,
    DefenseParametrization, GilbertElliotParams,
};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn attack_division(c: &mut Criterion) {
    let (channels, omega, q) = table1_defender();
    c.bench_function("attack_division_table1", |b| {
        b.iter(|| solve_attack_division(black_box(&q), black_box(&omega), &channels, 0.5, None).unwrap())
    });
}

fn defense(c: &mut Criterion) {
    let params = GilbertElliotParams::baseline();
    let (channels, omega, _) = table1_defender();
    let mut group = c.benchmark_group("defense");
    group.sample_size(10);
    group.bench_function("two_channel", |b| b.iter(|| solve_two_channel_defense(black_box(0.5), &params).unwrap()));
    group.bench_function("boltzmann_table1", |b| {
        b.iter(|| solve_defense(black_box(&omega), &channels, 0.5, DefenseParametrization::boltzmann()).unwrap())
    });
    group.finish();
}

fn chain(c: &mut Criterion) {
    let spec = TpChainSpec::new(GilbertElliotParams::baseline(), AttackProbability::new(0.3).unwrap()).unwrap();
    c.bench_function("tp_chain_stationary", |b| b.iter(|| tp_chain_stationary(black_box(&spec)).unwrap()));
}

criterion_group!(benches, attack_division, defense, chain);
criterion_main!(benches);
