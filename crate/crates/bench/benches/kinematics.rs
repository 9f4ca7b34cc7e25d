use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pac_bench::{arm, bent};
use pac_core::geometry::arc::arc_integral;
use pac_core::numdiff::point_jacobian_fd;
use pac_core::{point_jacobian, robot_fk};

fn arc(c: &mut Criterion) {
    let mut g = c.benchmark_group("arc_integral");
    for (name, c1) in [("constant", 0.0), ("small_slope", 5e-5), ("fresnel", 2.5)] {
        g.bench_function(name, |b| b.iter(|| arc_integral(black_box(1.3), black_box(c1), 1.0)));
    }
    g.finish();
}

fn forward_kinematics(c: &mut Criterion) {
    let mut g = c.benchmark_group("robot_fk");
    for n in [1, 3, 6] {
        let (params, q) = (arm(n), bent(n));
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| robot_fk(black_box(&q), &params).unwrap())
        });
    }
    g.finish();
}

fn jacobian(c: &mut Criterion) {
    let (params, q) = (arm(3), bent(3));
    let mut g = c.benchmark_group("tip_jacobian");
    g.bench_function("analytic", |b| {
        b.iter(|| point_jacobian(black_box(&q), &params, 2, 1.0).unwrap())
    });
    g.bench_function("finite_difference", |b| {
        b.iter(|| point_jacobian_fd(black_box(&q), &params, 2, 1.0, 1e-6).unwrap())
    });
    g.finish();
}

criterion_group!(benches, arc, forward_kinematics, jacobian);
criterion_main!(benches);
