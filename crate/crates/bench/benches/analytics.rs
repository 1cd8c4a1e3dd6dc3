use std::hint::black_box;

use cda_core::{acf, log_returns, moments, run, ModelParams};
use criterion::{criterion_group, criterion_main, Criterion};

fn bench_statistics(c: &mut Criterion) {
    let params = ModelParams::symmetric(500, 5, 0.8, 250).unwrap();
    let out = run(&params, 1_000_000, 7).unwrap();
    let returns = log_returns(&out.trades);
    let abs = returns.absolute();

    c.bench_function("moments", |b| b.iter(|| moments(black_box(&returns.values))));
    c.bench_function("acf_lag50", |b| b.iter(|| acf(black_box(&abs), 50)));
}

criterion_group!(benches, bench_statistics);
criterion_main!(benches);
