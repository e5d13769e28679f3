use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::f64::consts::PI;
use std::hint::black_box;

use qlsa_core::linalg::generate::{hermitian_with_spectrum, random_vector};
use qlsa_core::qsim::run_qlsa;
use qlsa_core::{QlsaParams, RegisterLayout, SparseMatrix, VectorOracle};

fn pipeline(c: &mut Criterion) {
    let h = SparseMatrix::from_dense(&hermitian_with_spectrum(
        &[1.0, -2.0, 3.0, 5.0, -4.0, 2.0, 7.0, -6.0],
        3,
    ));
    let b = VectorOracle::from_vector(&random_vector(8, 4)).unwrap();
    let mut g = c.benchmark_group("qlsa_exact");
    g.sample_size(10);
    for t in [4usize, 6, 8] {
        let layout = RegisterLayout::for_dimension(8, t).unwrap();
        let params = QlsaParams::exact(2.0 * PI);
        g.bench_with_input(BenchmarkId::new("clock", t), &layout, |bch, l| {
            bch.iter(|| run_qlsa(black_box(&h), &b, &params, l).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("qlsa_trotter");
    g.sample_size(10);
    let layout = RegisterLayout::for_dimension(8, 5).unwrap();
    for steps in [2usize, 8] {
        let params = QlsaParams::trotter(2.0 * PI, 2, steps);
        g.bench_with_input(BenchmarkId::new("steps", steps), &params, |bch, p| {
            bch.iter(|| run_qlsa(black_box(&h), &b, p, &layout).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
