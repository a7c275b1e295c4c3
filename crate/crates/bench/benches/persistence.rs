use std::hint::black_box;

use cbdc_bench::{corpus, ring};
use cbdc_core::topology::{
    bottleneck_distance, build_filtration, diagram_of_image, persistence_h0_unionfind, reduce_boundary_matrix,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn h0_reduction_vs_union_find(c: &mut Criterion) {
    let mut group = c.benchmark_group("h0");
    for side in [16, 32, 64] {
        let img = ring(side);
        group.bench_with_input(BenchmarkId::new("boundary_reduction", side), &img, |b, img| {
            b.iter(|| reduce_boundary_matrix(&build_filtration(black_box(img))).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("union_find", side), &img, |b, img| {
            b.iter(|| persistence_h0_unionfind(black_box(img)))
        });
    }
    group.finish();
}

fn bottleneck(c: &mut Criterion) {
    let mut group = c.benchmark_group("bottleneck");
    for side in [16, 32] {
        let data = corpus(2, side);
        let (a, b) = (diagram_of_image(&data[0].0), diagram_of_image(&data[1].0));
        for dim in [0u8, 1] {
            group.bench_function(BenchmarkId::new(format!("dim{dim}"), side), |bench| {
                bench.iter(|| bottleneck_distance(black_box(&a), black_box(&b), dim))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, h0_reduction_vs_union_find, bottleneck);
criterion_main!(benches);
