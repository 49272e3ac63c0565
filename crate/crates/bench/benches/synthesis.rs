use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use phg_bench::{dense_coefficients, spec};
use phg_core::transform::{analyze, synthesize, synthesize_direct, upsample_eval};

fn fft_vs_direct(c: &mut Criterion) {
    let mut group = c.benchmark_group("synthesis");
    for (n, l) in [(1, 81), (2, 9), (2, 27), (3, 9)] {
        let s = spec(n, l);
        let f = dense_coefficients(&s, 1);
        let label = format!("n{n}_L{l}");
        group.bench_with_input(BenchmarkId::new("fft", &label), &f, |b, f| b.iter(|| synthesize(black_box(f), &s).unwrap()));
        group.bench_with_input(BenchmarkId::new("direct", &label), &f, |b, f| {
            b.iter(|| synthesize_direct(black_box(f), &s).unwrap())
        });
    }
    group.finish();
}

fn round_trip(c: &mut Criterion) {
    let s = spec(2, 81);
    let f = dense_coefficients(&s, 2);
    let g = synthesize(&f, &s).unwrap();
    c.bench_function("analyze n2_L81", |b| b.iter(|| analyze(black_box(&g))));
    let small = dense_coefficients(&spec(2, 27), 3);
    c.bench_function("upsample n2_L27_to_M243", |b| b.iter(|| upsample_eval(black_box(&small), 27, 243).unwrap()));
}

criterion_group!(benches, fft_vs_direct, round_trip);
criterion_main!(benches);
