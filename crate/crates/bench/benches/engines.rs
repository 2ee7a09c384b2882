//! Timings of the three engines: quadrature rules, chain integrals and
//! lattice series.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use selberg_core::chains::{integrate_chain, Chain, ChainIntegrand, Interval, QuadSpec};
use selberg_core::closed_forms::ParamSet;
use selberg_core::integrands::Assembled;
use selberg_core::lattice_series::{sum_discrete, SeriesKind};
use selberg_core::quadrature::gauss_jacobi01;
use selberg_core::recursions::solve_j_closed;

fn rules(c: &mut Criterion) {
    c.bench_function("gauss_jacobi01 n=16", |b| {
        b.iter(|| gauss_jacobi01(black_box(16), black_box(-0.3)))
    });
}

fn chains(c: &mut Criterion) {
    let p = ParamSet::sl3(2, 1, 1.3, 0.7, 0.9, -0.1);
    let f = ChainIntegrand::for_identity(Assembled::Selb3, &p).unwrap();
    let chain = Chain::selberg(2, 1, p.gamma).unwrap();
    let q = QuadSpec::deterministic(12);
    c.bench_function("selb3 chain (2,1) n=12", |b| {
        b.iter(|| integrate_chain(black_box(&f), &chain, Interval::Unit, &q))
    });
    let q = QuadSpec::monte_carlo(100_000, 1);
    let f = ChainIntegrand::for_identity(Assembled::Exp3, &p).unwrap();
    c.bench_function("exp3 chain (2,1) 1e5 samples", |b| {
        b.iter(|| integrate_chain(black_box(&f), &chain, Interval::HalfLine, &q))
    });
}

fn series(c: &mut Criterion) {
    let mut p = ParamSet::sl3(2, 1, 1.3, 0.7, 0.9, -0.15);
    p.z1 = 0.3;
    p.z2 = 0.3;
    c.bench_function("dexp3 (2,1) rel 1e-10", |b| {
        b.iter(|| sum_discrete(SeriesKind::Dexp3, black_box(&p), 1e-10, 200))
    });
    c.bench_function("J tables (3,2)", |b| {
        let q = ParamSet::sl3(3, 2, 1.3, 0.7, 0.9, -0.15);
        b.iter(|| solve_j_closed(black_box(&q)))
    });
}

criterion_group!(benches, rules, chains, series);
criterion_main!(benches);
