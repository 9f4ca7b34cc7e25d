use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pac_bench::{bent, loaded_problem};
use pac_core::{solve_statics, static_residual, SolverOptions};

fn residual(c: &mut Criterion) {
    let p = loaded_problem(3, 0.2);
    let q = bent(3);
    c.bench_function("static_residual/3", |b| {
        b.iter(|| static_residual(black_box(&q), &p).unwrap())
    });
}

fn solve(c: &mut Criterion) {
    let options = SolverOptions::default();
    let mut g = c.benchmark_group("solve_statics");
    g.sample_size(20);
    for mass in [0.0, 0.5, 1.0] {
        let p = loaded_problem(3, mass);
        g.bench_with_input(BenchmarkId::new("tip_mass_kg", mass), &p, |b, p| {
            b.iter(|| solve_statics(black_box(p), &options).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, residual, solve);
criterion_main!(benches);
