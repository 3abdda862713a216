use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use plinvert_core::degree::{
    degree_boundary, degree_field, degree_integral, degree_regular_sum, MollifierSpec,
};
use plinvert_core::fixtures::{fixture_angle_doubling, random_op_map, square_grid_mesh};
use std::sync::Arc;

fn bench_degree_algorithms(c: &mut Criterion) {
    let mut group = c.benchmark_group("degree");
    for n in [4usize, 8, 16] {
        let mesh = Arc::new(square_grid_mesh(n, [0.0, 0.0, 0.0], 1.0));
        let map = random_op_map(mesh, 7);
        let a = map.mesh.full_submesh();
        let z = map.eval_in_simplex(0, map.mesh.simplex_centroid(0));
        let gap = map.dist_to_image_boundary(&a, z);
        group.bench_with_input(BenchmarkId::new("boundary_winding", n), &n, |b, _| {
            b.iter(|| degree_boundary(&map, &a, z).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("regular_sum", n), &n, |b, _| {
            b.iter(|| degree_regular_sum(&map, &a, z))
        });
        group.bench_with_input(BenchmarkId::new("integral", n), &n, |b, _| {
            b.iter(|| {
                degree_integral(
                    &map,
                    &a,
                    z,
                    &MollifierSpec {
                        center: z,
                        radius: 0.25 * gap,
                    },
                )
            })
        });
    }
    group.finish();
}

fn bench_degree_field(c: &mut Criterion) {
    let f = fixture_angle_doubling(48);
    let a = f.map.mesh.full_submesh();
    let mut group = c.benchmark_group("degree_field");
    group.sample_size(10);
    for res in [64usize, 128, 256] {
        group.bench_with_input(BenchmarkId::from_parameter(res), &res, |b, &res| {
            b.iter(|| degree_field(&f.map, &a, res).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_degree_algorithms, bench_degree_field);
criterion_main!(benches);
