use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nrdr_core::datasets::gen_strip;
use nrdr_core::eigensolve::{top_eigenpair, EigenConfig};
use nrdr_core::embed::{nonredundant_embed, spectral_embed, EmbedConfig};
use nrdr_core::kernels::{kernel_lem, knn_graph, to_maximization, Metric};
use nrdr_core::smoother::{bandwidth, build_nw_smoother, truncated_right_singular_basis};

fn strip_kernel(n: usize) -> nrdr_core::KernelMatrix {
    let cloud = gen_strip(n, 2.5, 1.0, 7).unwrap();
    kernel_lem(&knn_graph(&cloud, 10, Metric::Euclidean).unwrap(), None).unwrap()
}

fn eigensolve(c: &mut Criterion) {
    let kernel = to_maximization(strip_kernel(2000)).unwrap();
    let cfg = EigenConfig::default();
    c.bench_function("lanczos top eigenpair, N=2000", |b| {
        b.iter(|| top_eigenpair(black_box(&kernel), &cfg).unwrap())
    });
}

fn smoother(c: &mut Criterion) {
    let kernel = strip_kernel(2000);
    let emb = spectral_embed(&kernel, &EmbedConfig { d: 1, ..EmbedConfig::default() }).unwrap();
    let prev = emb.projections.view();
    let h = bandwidth(prev, 0.3).unwrap();
    c.bench_function("smoother build + truncated SVD, N=2000", |b| {
        b.iter(|| {
            let p = build_nw_smoother(black_box(prev), h, 2000).unwrap();
            truncated_right_singular_basis(&p, 0.03, 0).unwrap()
        })
    });
}

fn embed(c: &mut Criterion) {
    let kernel = strip_kernel(1500);
    let cfg = EmbedConfig { d: 2, ..EmbedConfig::default() };
    let mut group = c.benchmark_group("embed N=1500 d=2");
    group.sample_size(10);
    group.bench_function("baseline", |b| b.iter(|| spectral_embed(black_box(&kernel), &cfg).unwrap()));
    group.bench_function("nonredundant", |b| {
        b.iter(|| nonredundant_embed(black_box(&kernel), &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, eigensolve, smoother, embed);
criterion_main!(benches);
