use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use pascu_bench::{hohlov, komatu, small_grid};
use pascu_core::auxfun::{pfq, AuxContext};
use pascu_core::certify::MFunctionalTable;
use pascu_core::{beta_sharp, extremal_function, verify_membership};

fn beta(c: &mut Criterion) {
    let (k, p) = komatu();
    c.bench_function("beta_sharp komatu", |b| b.iter(|| beta_sharp(black_box(&k), black_box(&p)).unwrap()));
    let (k, p) = hohlov();
    c.bench_function("beta_sharp hohlov", |b| b.iter(|| beta_sharp(black_box(&k), black_box(&p)).unwrap()));
}

fn moments(c: &mut Criterion) {
    let (k, _) = komatu();
    c.bench_function("moments 512", |b| b.iter(|| k.moments(black_box(512)).unwrap()));
}

fn functional(c: &mut Criterion) {
    let (k, p) = komatu();
    let p = p.with_beta(beta_sharp(&k, &p).unwrap().beta);
    c.bench_function("m-functional table", |b| b.iter(|| MFunctionalTable::new(black_box(&k), black_box(&p)).unwrap()));
    let table = MFunctionalTable::new(&k, &p).unwrap();
    let grid = small_grid();
    c.bench_function("m-functional minimum", |b| b.iter(|| table.minimum(black_box(&p), &grid).unwrap()));
}

fn membership(c: &mut Criterion) {
    let (k, p) = komatu();
    let beta = beta_sharp(&k, &p).unwrap().beta;
    let f = extremal_function(p.mu, p.nu, beta, 512).apply_transform(&k.moments(512).unwrap()).unwrap();
    let grid = small_grid();
    c.bench_function("membership 512", |b| b.iter(|| verify_membership(black_box(&f), p.sigma, p.xi, &grid).unwrap()));
}

fn aux(c: &mut Criterion) {
    let ctx = AuxContext::from_params(&komatu().1).unwrap();
    c.bench_function("combined_gq 0.5", |b| b.iter(|| ctx.combined_gq(black_box(0.5)).unwrap()));
    c.bench_function("combined_gq 0.999", |b| b.iter(|| ctx.combined_gq(black_box(0.999)).unwrap()));
    let (n, d) = ([1.0, 1.0, 0.5, 1.9, 2.0], [2.0, 1.5, 0.9, 1.0]);
    c.bench_function("pfq 5F4", |b| b.iter(|| pfq(black_box(&n), black_box(&d), black_box(-0.7)).unwrap()));
}

criterion_group!(
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = beta, moments, functional, membership, aux,
);
criterion_main!(benches);
