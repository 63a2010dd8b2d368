use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use weilforge_core::weil::h_spectrum;
use weilforge_core::{
    builtin_example, check_generating_bounds, estimate, hodge_connection_series, kahler_form, levi_civita, solve,
    solve_polarization, ChristoffelJet, Fc, Qc, Scalar,
};

fn gamma<S: Scalar>(name: &str, dim: u8, order: u32) -> ChristoffelJet<S> {
    levi_civita(&builtin_example::<S>(name, dim, order).unwrap(), 0.0).unwrap()
}

fn bench_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    for order in [3u32, 5, 7] {
        let g = gamma::<Qc>("fubini-study", 1, order);
        group.bench_with_input(BenchmarkId::new("fs-dim1-exact", order), &order, |b, &n| {
            b.iter(|| solve(black_box(&g), n, 0.0).unwrap())
        });
        let gf = gamma::<Fc>("fubini-study", 1, order);
        group.bench_with_input(BenchmarkId::new("fs-dim1-float", order), &order, |b, &n| {
            b.iter(|| solve(black_box(&gf), n, 1e-10).unwrap())
        });
    }
    let g2 = gamma::<Qc>("fubini-study", 2, 3);
    group.bench_function("fs-dim2-exact/3", |b| b.iter(|| solve(black_box(&g2), 3, 0.0).unwrap()));
    group.finish();
}

fn bench_polarize(c: &mut Criterion) {
    let g = builtin_example::<Qc>("fubini-study", 1, 5).unwrap();
    let sol = solve(&levi_civita(&g, 0.0).unwrap(), 5, 0.0).unwrap();
    let om = kahler_form(&g);
    c.bench_function("polarize/fs-dim1-exact/5", |b| {
        b.iter(|| solve_polarization(black_box(&sol), &om, 5, 0.0).unwrap())
    });
}

fn bench_estimates(c: &mut Criterion) {
    let g = builtin_example::<Qc>("fubini-study", 1, 5).unwrap();
    let sol = solve(&levi_civita(&g, 0.0).unwrap(), 5, 0.0).unwrap();
    let pol = solve_polarization(&sol, &kahler_form(&g), 5, 0.0).unwrap();
    let series = hodge_connection_series(&sol).unwrap();
    let mut group = c.benchmark_group("estimates");
    group.sample_size(20);
    group.bench_function("estimate/fs-dim1/5", |b| {
        b.iter(|| estimate(black_box(&sol), &series, Some(&pol), 0.0).unwrap())
    });
    group.bench_function("generating-bounds/12", |b| b.iter(|| check_generating_bounds(12, 12, 12)));
    group.finish();
}

fn bench_spectrum(c: &mut Criterion) {
    let mut group = c.benchmark_group("h-spectrum");
    for k in [2u32, 4, 6] {
        group.bench_with_input(BenchmarkId::new("dim2", k), &k, |b, &k| {
            b.iter(|| h_spectrum::<Qc>(2, k, 1, 0.0).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_solve, bench_polarize, bench_estimates, bench_spectrum);
criterion_main!(benches);
