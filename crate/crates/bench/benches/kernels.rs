//! Hot-kernel benchmarks: point enumeration, Weyl sums, the p-adic
//! oscillatory factor, and the exact cone volume on the largest built-in
//! model.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use manin_core::cone::{alpha_peyre, dual_cone};
use manin_core::count::count_points;
use manin_core::expsum::{clausen_partial, weyl_sum, WeylSumSpec};
use manin_core::local::{oscillatory_integral, OscillationQuery};
use manin_core::surface::load_model;
use manin_core::tamagawa::{tamagawa_number, tau_local};
use manin_core::{Int, Rat};

fn bench_count(c: &mut Criterion) {
    let model = load_model("ex1", None).unwrap();
    let mut group = c.benchmark_group("count_points");
    group.sample_size(10);
    for bound in [10_000u64, 100_000] {
        group.bench_with_input(BenchmarkId::from_parameter(bound), &bound, |b, &bound| {
            b.iter(|| count_points(black_box(&model), black_box(bound)).unwrap())
        });
    }
    group.finish();
}

fn bench_weyl(c: &mut Criterion) {
    let spec = WeylSumSpec::plain(vec![2, 1], vec![64, 64], 1, 4099);
    c.bench_function("weyl_sum_64x64", |b| {
        b.iter(|| weyl_sum(black_box(&spec)).unwrap())
    });
}

fn bench_oscillatory(c: &mut Criterion) {
    let model = load_model("ex1", None).unwrap();
    let s = OscillationQuery::probe_exponents(&model);
    let alpha = Rat::new(Int::from(1), Int::from(25));
    let query = OscillationQuery::new(s, alpha, 5).unwrap();
    c.bench_function("oscillatory_integral_p5", |b| {
        b.iter(|| oscillatory_integral(black_box(&model), black_box(&query)).unwrap())
    });
}

fn bench_cone(c: &mut Criterion) {
    let model = load_model("ex2", None).unwrap();
    let u = model.ord_a_vector();
    let all: Vec<usize> = (0..model.num_divisors()).collect();
    c.bench_function("dual_cone_ex2", |b| {
        b.iter(|| dual_cone(black_box(&all), black_box(&u)).unwrap())
    });
    c.bench_function("alpha_peyre_ex2", |b| {
        b.iter(|| alpha_peyre(black_box(&model)).unwrap())
    });
}

fn bench_tamagawa(c: &mut Criterion) {
    let model = load_model("ex1", None).unwrap();
    c.bench_function("tau_local_10007", |b| {
        b.iter(|| tau_local(black_box(&model), black_box(10_007)).unwrap())
    });
    let mut group = c.benchmark_group("tamagawa_number");
    group.sample_size(10);
    group.bench_function("pmax_10000", |b| {
        b.iter(|| tamagawa_number(black_box(&model), 10_000, 1e-8).unwrap())
    });
    group.finish();
}

fn bench_clausen(c: &mut Criterion) {
    let theta = Rat::new(Int::from(1), Int::from(3));
    c.bench_function("clausen_partial_1e5", |b| {
        b.iter(|| {
            clausen_partial(
                black_box(&theta),
                num_complex::Complex64::new(1.0, 0.0),
                100_000,
            )
            .unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_count,
    bench_weyl,
    bench_oscillatory,
    bench_cone,
    bench_tamagawa,
    bench_clausen
);
criterion_main!(benches);
