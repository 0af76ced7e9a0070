use cogjam_bench::small_sim;
use cogjam_core::run_replications;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn replications(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_replications");
    group.sample_size(10);
    for n in [4, 10] {
        let config = small_sim(n, 20_000, 4);
        group.throughput(Throughput::Elements(20_000 * 4));
        group.bench_with_input(BenchmarkId::from_parameter(n), &config, |b, config| b.iter(|| run_replications(config).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, replications);
criterion_main!(benches);
