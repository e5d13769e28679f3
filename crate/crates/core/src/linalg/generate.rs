//! Seeded random test matrices and vectors.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{DenseVector, SparseMatrix};
use crate::C64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit_complex(rng: &mut impl Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_vector(n: usize, seed: u64) -> DenseVector {
    let mut r = rng(seed);
    DenseVector::from_fn(n, |_, _| unit_complex(&mut r))
}

pub fn random_dense(n: usize, seed: u64) -> DMatrix<C64> {
    let mut r = rng(seed);
    DMatrix::from_fn(n, n, |_, _| unit_complex(&mut r))
}

/// Exactly Hermitian part `(A + A^H) / 2`.
pub fn hermitian_part(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    DMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// Unitary from the QR factorization of a random complex matrix.
pub fn random_unitary(n: usize, seed: u64) -> DMatrix<C64> {
    random_dense(n, seed).qr().q()
}

/// `U diag(lambda) U^H` for a random unitary `U`, Hermitian to the last bit.
pub fn hermitian_with_spectrum(spectrum: &[f64], seed: u64) -> DMatrix<C64> {
    let n = spectrum.len();
    let u = random_unitary(n, seed);
    let d = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(spectrum[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    hermitian_part(&(&u * d * u.adjoint()))
}

/// Random Hermitian matrix with roughly `d` nonzeros per row.
pub fn random_sparse_hermitian(n: usize, d: usize, seed: u64) -> SparseMatrix {
    let mut r = rng(seed);
    let mut rows = vec![Vec::new(); n];
    for i in 0..n {
        rows[i].push((i, C64::new(r.gen_range(-1.0..1.0), 0.0)));
        for _ in 0..d.saturating_sub(1) / 2 {
            let j = r.gen_range(0..n);
            if j == i || rows[i].iter().any(|&(c, _)| c == j) {
                continue;
            }
            let v = unit_complex(&mut r);
            rows[i].push((j, v));
            rows[j].push((i, v.conj()));
        }
    }
    SparseMatrix::from_rows(rows)
}

/// Random sparse matrix whose diagonal dominates each row by `ratio`.
///
/// Off-diagonal entries are placed at up to `offdiag` random positions per row;
/// the diagonal is `ratio * sum |offdiag|` with a random phase-free sign.
pub fn diagonally_dominant(n: usize, offdiag: usize, ratio: f64, seed: u64) -> SparseMatrix {
    let mut r = rng(seed);
    let mut rows = vec![Vec::new(); n];
    for (i, row) in rows.iter_mut().enumerate() {
        let mut sum = 0.0;
        let mut seen = vec![i];
        for _ in 0..offdiag {
            let j = r.gen_range(0..n);
            if seen.contains(&j) {
                continue;
            }
            seen.push(j);
            let v = unit_complex(&mut r);
            sum += v.norm();
            row.push((j, v));
        }
        let scale = r.gen_range(1.0..4.0);
        row.push((i, C64::new(ratio * sum.max(1.0) * scale, 0.0)));
    }
    SparseMatrix::from_rows(rows)
}
