use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fidelity_moo::metrics::{gnf, NeighborhoodSpec};
use fidelity_moo::moo::solve_alpha;
use fidelity_moo::trainers::{train, LocalSurrogates};
use fidelity_moo::Method;
use fidelity_moo_bench::{gradient_pair, model_and_batch, one_epoch, synthetic};

fn alpha(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_alpha");
    for dim in [1_000, 10_000, 100_000] {
        let (g1, g2) = gradient_pair(dim, 0);
        group.bench_with_input(BenchmarkId::from_parameter(dim), &dim, |b, _| {
            b.iter(|| solve_alpha(black_box(&g1), black_box(&g2)).unwrap())
        });
    }
    group.finish();
}

fn mlp(c: &mut Criterion) {
    let (model, batch) = model_and_batch(10, &[64, 64], 128, 1);
    let upstream = vec![1.0; 128];
    c.bench_function("forward 10-64-64-1 x128", |b| {
        b.iter(|| model.forward_batch(black_box(&batch)).unwrap())
    });
    c.bench_function("backward 10-64-64-1 x128", |b| {
        b.iter(|| {
            model
                .backward(black_box(&batch), black_box(&upstream))
                .unwrap()
        })
    });
}

fn epochs(c: &mut Criterion) {
    let ds = synthetic(2000, 10);
    let mut group = c.benchmark_group("epoch n=2000 d=10 [32,32] batch 64");
    group.sample_size(10);
    for method in [Method::Stl, Method::Moo, Method::Uni] {
        let cfg = one_epoch(&[32, 32], 64).with_method(method);
        group.bench_function(method.to_string(), |b| {
            b.iter(|| train(black_box(&ds), &cfg).unwrap())
        });
    }
    group.finish();
}

fn local_gnf(c: &mut Criterion) {
    let ds = synthetic(500, 10);
    let (model, _) = model_and_batch(10, &[32, 32], 1, 2);
    let points = ds.features.select_rows(&(0..20).collect::<Vec<_>>());
    let provider = LocalSurrogates::new(NeighborhoodSpec::gaussian(0.1, 100, 3), 20_000);
    let spec = NeighborhoodSpec::gaussian(0.1, 10, 4);
    let mut group = c.benchmark_group("gnf");
    group.sample_size(20);
    group.bench_function("20 points local fits", |b| {
        b.iter(|| gnf(&model, &provider, black_box(&points), &spec).unwrap())
    });
    group.finish();
}

criterion_group!(benches, alpha, mlp, epochs, local_gnf);
criterion_main!(benches);
