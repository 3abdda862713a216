use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use plinvert_core::conditions::{check_aib, check_cnc, check_injective_ae};
use plinvert_core::fixtures::{fixture_pinch, random_op_map, square_grid_mesh};
use plinvert_core::topology::preimage_components;
use std::sync::Arc;

fn bench_cnc(c: &mut Criterion) {
    let mesh = Arc::new(square_grid_mesh(8, [0.0, 0.0, 0.0], 1.0));
    let map = random_op_map(mesh, 3);
    let mut group = c.benchmark_group("cnc");
    group.sample_size(10);
    for samples in [10_000usize, 100_000] {
        group.bench_with_input(BenchmarkId::from_parameter(samples), &samples, |b, &s| {
            b.iter(|| check_cnc(&map, s, 0))
        });
    }
    group.finish();
}

fn bench_injectivity(c: &mut Criterion) {
    let mesh = Arc::new(square_grid_mesh(8, [0.0, 0.0, 0.0], 1.0));
    let map = random_op_map(mesh, 3);
    let mut group = c.benchmark_group("injective_ae");
    group.sample_size(10);
    group.bench_function("100k", |b| b.iter(|| check_injective_ae(&map, 100_000, 0)));
    group.finish();
}

fn bench_aib_and_preimages(c: &mut Criterion) {
    let pinch = fixture_pinch(32);
    let mut group = c.benchmark_group("topology");
    group.sample_size(10);
    group.bench_function("aib_pinch", |b| b.iter(|| check_aib(&pinch.map, 12)));
    let u = pinch.map.mesh.full_submesh();
    group.bench_function("preimage_components", |b| {
        b.iter(|| preimage_components(&pinch.map, &u, [0.0, 1.5, 0.0], None).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_cnc, bench_injectivity, bench_aib_and_preimages);
criterion_main!(benches);
