use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use nabla_bench::{kummer_half, potential_module, wide_poly};
use nabla_core::newton::{shrink_interval, AlignedInterval};
use nabla_core::{intrinsic_radius, iterated_matrices, RadiusOptions, RadiusVector};
use num_rational::BigRational;

fn iterated(c: &mut Criterion) {
    let mut g = c.benchmark_group("iterated_matrices");
    let k = kummer_half();
    let t = potential_module(3);
    for depth in [50usize, 200] {
        g.bench_with_input(BenchmarkId::new("kummer_half", depth), &depth, |b, &d| {
            b.iter(|| iterated_matrices(black_box(&k), 0, d).unwrap())
        });
    }
    g.bench_function("potential_2var/40", |b| {
        b.iter(|| iterated_matrices(black_box(&t), 0, 40).unwrap())
    });
    g.finish();
}

fn radius(c: &mut Criterion) {
    let opts = RadiusOptions::default();
    let t = potential_module(5);
    c.bench_function("intrinsic_radius/potential_2var/64", |b| {
        b.iter(|| intrinsic_radius(black_box(&t), &RadiusVector::ones(2), 64, &opts).unwrap())
    });
}

fn shrink(c: &mut Criterion) {
    let i = AlignedInterval::new(
        BigRational::from_integer(3.into()),
        BigRational::new(1.into(), 3.into()),
    )
    .unwrap();
    let mut g = c.benchmark_group("shrink_interval");
    for len in [4i64, 12, 40] {
        let a = wide_poly(2, len);
        g.bench_with_input(BenchmarkId::from_parameter(len), &a, |b, a| {
            b.iter(|| shrink_interval(black_box(a), &i).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, iterated, radius, shrink);
criterion_main!(benches);
