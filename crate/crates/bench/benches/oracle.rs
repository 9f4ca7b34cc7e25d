use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::Vector3;
use pac_bench::arm;
use pac_core::oracle::{dense_equilibrium, fit_model, DenseRod, RodLoads};
use pac_core::{ModelKind, PointLoad};

fn loads() -> RodLoads {
    RodLoads {
        point_loads: vec![PointLoad::force(2, 1.0, Vector3::new(0.12, 0.0, 0.0))],
        ..RodLoads::default()
    }
}

fn equilibrium(c: &mut Criterion) {
    let mut g = c.benchmark_group("dense_equilibrium");
    g.sample_size(10);
    for n in [50, 100, 200] {
        let rod = DenseRod::new(&arm(3), n).unwrap();
        g.bench_with_input(BenchmarkId::new("elements_per_segment", n), &rod, |b, rod| {
            b.iter(|| dense_equilibrium(black_box(rod), &loads()).unwrap())
        });
    }
    g.finish();
}

fn fit(c: &mut Criterion) {
    let params = arm(3);
    let rod = dense_equilibrium(&DenseRod::new(&params, 60).unwrap(), &loads()).unwrap();
    let samples = rod.samples();
    let mut g = c.benchmark_group("fit_model");
    g.sample_size(20);
    for model in [ModelKind::Pcc, ModelKind::Pac] {
        g.bench_function(model.to_string(), |b| {
            b.iter(|| fit_model(black_box(&samples), model, &params).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, equilibrium, fit);
criterion_main!(benches);
