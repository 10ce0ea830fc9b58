use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use essbound_core::growth::{default_r_grid, volume_profile};
use essbound_core::spectrum::{assemble_chart, dirichlet_lambda1, DEFAULT_TOLERANCE};
use essbound_core::{catalog, BallIntegrator, SurfaceId};

const CATENOID: SurfaceId = SurfaceId::Catenoid { neck: 1.0 };

fn ball_volume(c: &mut Criterion) {
    let mut group = c.benchmark_group("ball_volume");
    for (name, surface) in [("plane", SurfaceId::Plane), ("catenoid", CATENOID), ("enneper", SurfaceId::Enneper)] {
        let q = BallIntegrator::for_chart(&catalog(surface, 20.0, 128).unwrap()).unwrap();
        group.bench_function(name, |b| b.iter(|| q.volume(black_box(15.0)).unwrap()));
    }
    group.finish();
}

fn dirichlet_eigenvalue(c: &mut Criterion) {
    let mut group = c.benchmark_group("lambda1");
    group.sample_size(10);
    let chart = catalog(CATENOID, 10.0, 64).unwrap();
    for res in [32, 64] {
        group.bench_function(format!("assemble catenoid r=10 res={res}"), |b| {
            b.iter(|| assemble_chart(&chart, black_box(10.0), res).unwrap())
        });
        let op = assemble_chart(&chart, 10.0, res).unwrap();
        group.bench_function(format!("solve catenoid r=10 res={res}"), |b| {
            b.iter(|| dirichlet_lambda1(black_box(&op), DEFAULT_TOLERANCE).unwrap())
        });
    }
    group.finish();
}

fn growth_profile(c: &mut Criterion) {
    let mut group = c.benchmark_group("growth_profile");
    group.sample_size(10);
    let q = BallIntegrator::for_chart(&catalog(SurfaceId::Helicoid, 50.0, 200).unwrap()).unwrap();
    let grid = default_r_grid(0.0, 50.0, 200).unwrap();
    group.bench_function("helicoid 200 radii", |b| b.iter(|| volume_profile(&q, black_box(&grid)).unwrap()));
    group.finish();
}

criterion_group!(benches, ball_volume, dirichlet_eigenvalue, growth_profile);
criterion_main!(benches);
