//! Benchmarks for the hot paths of the jet calculus: group composition and
//! inversion, invariant extraction, Euler-Lagrange derivation and the
//! second-order Lagrange-Souriau construction.

use criterion::{criterion_group, criterion_main, Criterion};
use jetvar_core::chart::ChartSpec;
use jetvar_core::expr::parse;
use jetvar_core::grassmann::{invariants, InvariantTable};
use jetvar_core::sample::Sampler;
use jetvar_core::souriau::build_alpha;
use jetvar_core::variational::{
    euler_lagrange, helmholtz, AdaptedLagrangian,
};
use std::hint::black_box;

fn bench_group_ops(c: &mut Criterion) {
    let mut s = Sampler::new(1);
    let a = s.group_element(3, 3);
    let b = s.group_element(3, 3);
    c.bench_function("compose n=3 r=3", |bench| {
        bench.iter(|| black_box(a.compose(&b).unwrap()))
    });
    c.bench_function("inverse n=3 r=3", |bench| {
        bench.iter(|| black_box(a.inverse().unwrap()))
    });
}

fn bench_invariants(c: &mut Criterion) {
    let mut s = Sampler::new(2);
    let jet = s.regular_velocity_jet(2, 3, 3);
    c.bench_function("invariants n=2 m=1 r=3", |bench| {
        bench.iter(|| black_box(invariants(&jet).unwrap()))
    });
    c.bench_function("symbolic invariant table n=2 m=1 r=2", |bench| {
        bench.iter(|| black_box(InvariantTable::new(2, 1, 2).unwrap()))
    });
}

fn bench_variational(c: &mut Criterion) {
    let chart = ChartSpec::adapted(2, 2, 2);
    let mut s = Sampler::new(3);
    let lag = AdaptedLagrangian { expr: s.poly_on_chart(&chart, 2, 5), n: 2, m: 2, r: 2 };
    c.bench_function("euler_lagrange n=2 m=2 r=2", |bench| {
        bench.iter(|| black_box(euler_lagrange(&lag).unwrap()))
    });
    let free = AdaptedLagrangian {
        expr: parse("y1_1^2/2", &ChartSpec::adapted(1, 1, 1)).unwrap(),
        n: 1,
        m: 1,
        r: 1,
    };
    let eq = euler_lagrange(&free).unwrap();
    c.bench_function("helmholtz of EL (free particle)", |bench| {
        bench.iter(|| black_box(helmholtz(&eq).unwrap()))
    });
}

fn bench_souriau(c: &mut Criterion) {
    let chart = ChartSpec::adapted(2, 2, 1);
    let mut s = Sampler::new(4);
    let lag = AdaptedLagrangian { expr: s.poly_on_chart(&chart, 2, 4), n: 2, m: 2, r: 1 };
    c.bench_function("build_alpha n=2 m=2", |bench| {
        bench.iter(|| black_box(build_alpha(&lag).unwrap()))
    });
}

criterion_group!(benches, bench_group_ops, bench_invariants, bench_variational, bench_souriau);
criterion_main!(benches);
