//! Replication throughput with one worker versus the full pool. Build with
//! `--no-default-features` to time the sequential fallback instead.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spillover::dgp::DgpKind;
use spillover::montecarlo::{run_experiment, CellRule, DesignKind, SimConfig};
use spillover::variance::Inflation;

fn config() -> SimConfig {
    let mut config = SimConfig::new(
        DgpKind::Group,
        vec![CellRule::A("25".parse().unwrap())],
        vec![DesignKind::Bernoulli, DesignKind::Complete],
        vec![1000, 4000],
        200,
    );
    config.variance_kinds = vec![Inflation::None, Inflation::Sr];
    config
}

fn workers(c: &mut Criterion) {
    let config = config();
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut group = c.benchmark_group(if spillover::par::is_parallel() { "rayon" } else { "sequential" });
    group.sample_size(10);
    let mut counts = vec![1, threads];
    counts.dedup();
    for w in counts {
        group.bench_with_input(BenchmarkId::new("workers", w), &w, |b, &w| {
            b.iter(|| black_box(run_experiment(&config, w).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, workers);
criterion_main!(benches);
