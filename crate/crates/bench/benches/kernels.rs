use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use sphere_eq::cauchy::{det_check, lambda_candidates, seeded_instance, AlphaDraw};
use sphere_eq::config::{energy, random_config};
use sphere_eq::search::{descend, SearchParams};
use sphere_eq::special_case::roots::{asymmetric_certificate, real_roots};
use sphere_eq::spectral::normalize;
use sphere_eq::Potential;

fn energy_kernels(c: &mut Criterion) {
    let pot = Potential::biquadratic();
    let small = random_config(5, 3, 7);
    let large = random_config(64, 8, 7);
    c.bench_function("energy n=5 m=3", |b| b.iter(|| energy(black_box(&small), &pot)));
    c.bench_function("energy n=64 m=8", |b| b.iter(|| energy(black_box(&large), &pot)));
    c.bench_function("normalize n=64 m=8", |b| b.iter(|| normalize(black_box(&large))));
}

fn descent(c: &mut Criterion) {
    let pot = Potential::biquadratic();
    let params = SearchParams::default();
    let start = random_config(5, 3, 11);
    c.bench_function("descend n=5 m=3", |b| b.iter(|| descend(black_box(&start), &pot, &params)));
}

fn cauchy_kernels(c: &mut Criterion) {
    let alphas: Vec<Complex64> = (0..8).map(|k| Complex64::new(0.3 * k as f64 - 1.0, 0.1 * k as f64)).collect();
    c.bench_function("lambda_candidates n=8", |b| b.iter(|| lambda_candidates(black_box(&alphas))));
    let inst = seeded_instance(3, 8, 3, AlphaDraw::Complex).unwrap();
    c.bench_function("det_check n=8 m=3", |b| b.iter(|| det_check(black_box(&inst))));
}

fn roots(c: &mut Criterion) {
    let cert = asymmetric_certificate();
    c.bench_function("real_roots degree 26", |b| b.iter(|| real_roots(black_box(&cert))));
}

criterion_group!(benches, energy_kernels, descent, cauchy_kernels, roots);
criterion_main!(benches);
