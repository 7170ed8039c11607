use criterion::{Criterion, criterion_group, criterion_main};
use std::hint::black_box;
use num_complex::Complex64;
use qsl_core::spectrum::{ScanConfig, TridiagonalOracle, find_eigenvalues};
use qsl_core::{GridFunction, LatticeSpec, PotentialSpec, solve, weyl};

fn harmonic() -> GridFunction {
    let l = LatticeSpec::new(0.8, -30, 50).unwrap();
    PotentialSpec::harmonic().materialize(&l).unwrap()
}

fn recurrences(c: &mut Criterion) {
    let u = harmonic();
    let lambda = Complex64::new(1.0, 1.0);
    c.bench_function("solution_pair", |b| {
        b.iter(|| solve::solution_pair(black_box(lambda), 0.0, &u).unwrap())
    });
    c.bench_function("decaying_solution", |b| {
        b.iter(|| solve::decaying_solution(black_box(lambda), &u).unwrap())
    });
}

fn weyl_disks(c: &mut Criterion) {
    let u = harmonic();
    let lambda = Complex64::new(1.0, 1.0);
    c.bench_function("classify", |b| {
        b.iter(|| weyl::classify(black_box(lambda), 0.0, &u, 1e-8).unwrap())
    });
    c.bench_function("m_both", |b| b.iter(|| weyl::m_both(black_box(lambda), 0.0, &u).unwrap()));
}

fn spectra(c: &mut Criterion) {
    let u = harmonic();
    let mut group = c.benchmark_group("spectrum");
    group.sample_size(10);
    group.bench_function("scan_0.1_60", |b| {
        b.iter(|| find_eigenvalues(&ScanConfig::new(0.1, 60.0), &u).unwrap())
    });
    group.bench_function("tridiagonal_oracle", |b| {
        b.iter(|| TridiagonalOracle::new(&u, 0.0).unwrap().eigenvalues_in(0.1, 60.0))
    });
    group.finish();
}

criterion_group!(benches, recurrences, weyl_disks, spectra);
criterion_main!(benches);
