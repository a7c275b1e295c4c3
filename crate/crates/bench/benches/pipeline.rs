use std::hint::black_box;

use cbdc_bench::corpus;
use cbdc_core::classifier::train;
use cbdc_core::pipeline::{augmented_pairs, featurize_batch};
use cbdc_core::TrainingConfig;
use criterion::{criterion_group, criterion_main, Criterion};

const THRESHOLDS: usize = 16;

fn featurize(c: &mut Criterion) {
    let labeled: Vec<_> = corpus(200, 16).into_iter().map(|(img, y)| (img, Some(y))).collect();
    c.bench_function("featurize_200x16", |b| {
        b.iter(|| featurize_batch(black_box(&labeled), THRESHOLDS).unwrap())
    });
}

fn train_ensemble(c: &mut Criterion) {
    let data = corpus(200, 16);
    let labeled: Vec<_> = data.iter().map(|(img, y)| (img.clone(), Some(*y))).collect();
    let records = featurize_batch(&labeled, THRESHOLDS).unwrap();
    let cfg = TrainingConfig::default();
    let images: Vec<_> = data.into_iter().map(|(img, _)| img).collect();
    let pairs = augmented_pairs(&images, &cfg.augment_spec, THRESHOLDS, cfg.seed).unwrap();
    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    group.bench_function("ensemble_200", |b| {
        b.iter(|| train(black_box(&records), black_box(&pairs), &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, featurize, train_ensemble);
criterion_main!(benches);
