use std::hint::black_box;

use cda_core::{run, ModelParams};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

const EVENTS: usize = 100_000;

fn bench_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("run");
    group.throughput(Throughput::Elements(EVENTS as u64));
    for rho in [0.8, 1.2, 6.0] {
        let params = ModelParams::symmetric(500, 5, rho, 250).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(rho), &params, |b, p| {
            b.iter(|| run(black_box(p), EVENTS, 1).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_run);
criterion_main!(benches);
