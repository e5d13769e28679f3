use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::DenseVector;
use crate::C64;

/// Row-query access to a sparse complex matrix.
///
/// A row query returns the nonzero entries of one row sorted by column, with
/// no explicit zeros. Implementations must be deterministic.
pub trait RowOracle: Sync {
    fn dim(&self) -> usize;

    fn query_row(&self, k: usize) -> Result<Vec<(usize, C64)>>;
}

/// Compressed sparse row matrix over `C64`.
///
/// Construction sums duplicate triplets, drops exact zeros and sorts columns,
/// so every row already satisfies the [`RowOracle`] invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    hermitian: bool,
}

impl SparseMatrix {
    pub fn from_triplets(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
        for (i, j, v) in triplets {
            if i >= dim {
                return Err(Error::Index { index: i, dim });
            }
            if j >= dim {
                return Err(Error::Index { index: j, dim });
            }
            rows[i].push((j, v));
        }
        Ok(Self::from_rows(rows))
    }

    /// Builds from unsorted per-row lists; duplicates are summed.
    pub fn from_rows(mut rows: Vec<Vec<(usize, C64)>>) -> Self {
        let dim = rows.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows.iter_mut() {
            row.sort_by_key(|&(j, _)| j);
            let mut i = 0;
            while i < row.len() {
                let j = row[i].0;
                let mut v = C64::new(0.0, 0.0);
                while i < row.len() && row[i].0 == j {
                    v += row[i].1;
                    i += 1;
                }
                if v != C64::new(0.0, 0.0) {
                    assert!(j < dim, "column {j} out of range for dimension {dim}");
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        let mut m = SparseMatrix {
            dim,
            row_ptr,
            cols,
            vals,
            hermitian: false,
        };
        m.hermitian = m.check_hermitian();
        m
    }

    pub fn from_dense(a: &DMatrix<C64>) -> Self {
        assert_eq!(a.nrows(), a.ncols(), "matrix must be square");
        let rows = (0..a.nrows())
            .map(|i| (0..a.ncols()).map(|j| (j, a[(i, j)])).collect())
            .collect();
        Self::from_rows(rows)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![C64::new(1.0, 0.0); dim])
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self::from_rows(
            diag.iter()
                .enumerate()
                .map(|(i, &v)| vec![(i, v)])
                .collect(),
        )
    }

    /// Tridiagonal Toeplitz matrix with the given (sub, main, super) stencil.
    pub fn tridiagonal(dim: usize, sub: C64, main: C64, sup: C64) -> Self {
        let rows = (0..dim)
            .map(|i| {
                let mut r = vec![(i, main)];
                if i > 0 {
                    r.push((i - 1, sub));
                }
                if i + 1 < dim {
                    r.push((i + 1, sup));
                }
                r
            })
            .collect();
        Self::from_rows(rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Maximum number of nonzeros in any row.
    pub fn sparsity(&self) -> usize {
        (0..self.dim)
            .map(|i| self.row_ptr[i + 1] - self.row_ptr[i])
            .max()
            .unwrap_or(0)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// `true` when `A[i][j] == A[j][i]` for every entry (complex symmetric).
    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).all(|(&j, &x)| self.get(j, i) == x)
        })
    }

    fn check_hermitian(&self) -> bool {
        (0..self.dim).all(|i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).all(|(&j, &x)| self.get(j, i) == x.conj())
        })
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[C64]) {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.cols[s..e], &self.vals[s..e])
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let (c, v) = self.row(i);
        match c.binary_search(&j) {
            Ok(p) => v[p],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(move |(&j, &x)| (i, j, x))
        })
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.iter() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut rows = vec![Vec::new(); self.dim];
        for (i, j, v) in self.iter() {
            rows[j].push((i, v));
        }
        Self::from_rows(rows)
    }

    pub fn adjoint(&self) -> Self {
        let mut rows = vec![Vec::new(); self.dim];
        for (i, j, v) in self.iter() {
            rows[j].push((i, v.conj()));
        }
        Self::from_rows(rows)
    }

    pub fn mul_vec(&self, x: &DenseVector) -> DenseVector {
        assert_eq!(x.len(), self.dim);
        DenseVector::from_iterator(
            self.dim,
            (0..self.dim).map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).map(|(&j, &a)| a * x[j]).sum::<C64>()
            }),
        )
    }

    /// `A^H x` without forming the adjoint.
    pub fn adjoint_mul_vec(&self, x: &DenseVector) -> DenseVector {
        assert_eq!(x.len(), self.dim);
        let mut y = DenseVector::zeros(self.dim);
        for (i, j, v) in self.iter() {
            y[j] += v.conj() * x[i];
        }
        y
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.dim, other.dim);
        let rows = (0..self.dim)
            .map(|i| {
                let (c, v) = self.row(i);
                let mut acc = Vec::new();
                for (&k, &a) in c.iter().zip(v) {
                    let (c2, v2) = other.row(k);
                    acc.extend(c2.iter().zip(v2).map(|(&j, &b)| (j, a * b)));
                }
                acc
            })
            .collect();
        SparseMatrix::from_rows(rows)
    }

    /// Largest absolute row sum; bounds the spectral radius.
    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).1.iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl RowOracle for SparseMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn query_row(&self, k: usize) -> Result<Vec<(usize, C64)>> {
        if k >= self.dim {
            return Err(Error::Index {
                index: k,
                dim: self.dim,
            });
        }
        let (c, v) = self.row(k);
        Ok(c.iter().copied().zip(v.iter().copied()).collect())
    }
}

/// Wraps an oracle and counts row queries.
pub struct CountingOracle<'a, O: RowOracle + ?Sized> {
    inner: &'a O,
    calls: AtomicU64,
}

impl<'a, O: RowOracle + ?Sized> CountingOracle<'a, O> {
    pub fn new(inner: &'a O) -> Self {
        CountingOracle {
            inner,
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }
}

impl<O: RowOracle + ?Sized> RowOracle for CountingOracle<'_, O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn query_row(&self, k: usize) -> Result<Vec<(usize, C64)>> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.query_row(k)
    }
}

/// Hermitian dilation `[[0, A], [A^H, 0]]` of dimension `2N`.
///
/// Solving the dilation with right-hand side `(b, 0)` yields `(0, x)` where
/// `A x = b`.
pub fn hermitian_dilation(a: &SparseMatrix) -> SparseMatrix {
    let n = a.dim();
    let mut rows = vec![Vec::new(); 2 * n];
    for (i, j, v) in a.iter() {
        rows[i].push((n + j, v));
        rows[n + j].push((i, v.conj()));
    }
    SparseMatrix::from_rows(rows)
}

/// Materialises every row of an oracle.
pub fn collect_oracle(oracle: &(impl RowOracle + ?Sized)) -> Result<SparseMatrix> {
    let rows = (0..oracle.dim())
        .map(|k| oracle.query_row(k))
        .collect::<Result<Vec<_>>>()?;
    Ok(SparseMatrix::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_row_query() {
        let id = SparseMatrix::identity(8);
        assert_eq!(id.query_row(3).unwrap(), vec![(3, c(1.0))]);
        assert!(id.is_hermitian());
    }

    #[test]
    fn tridiagonal_interior_row() {
        let t = SparseMatrix::tridiagonal(10, c(-1.0), c(2.0), c(-1.0));
        assert_eq!(
            t.query_row(4).unwrap(),
            vec![(3, c(-1.0)), (4, c(2.0)), (5, c(-1.0))]
        );
        assert_eq!(t.sparsity(), 3);
    }

    #[test]
    fn out_of_range_row_is_index_error() {
        let t = SparseMatrix::identity(4);
        assert!(matches!(
            t.query_row(4),
            Err(Error::Index { index: 4, dim: 4 })
        ));
    }

    #[test]
    fn duplicates_summed_and_zeros_dropped() {
        let m = SparseMatrix::from_triplets(
            2,
            vec![
                (0, 1, c(1.0)),
                (0, 1, c(-1.0)),
                (1, 0, c(2.0)),
                (1, 0, c(3.0)),
            ],
        )
        .unwrap();
        assert_eq!(m.query_row(0).unwrap(), vec![]);
        assert_eq!(m.query_row(1).unwrap(), vec![(0, c(5.0))]);
    }

    #[test]
    fn dilation_of_identity_is_pauli_like() {
        let h = hermitian_dilation(&SparseMatrix::identity(3));
        assert!(h.is_hermitian());
        let eig = nalgebra::SymmetricEigen::new(h.to_dense());
        for l in eig.eigenvalues.iter() {
            assert!((l.abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn counting_oracle_counts() {
        let m = SparseMatrix::identity(4);
        let o = CountingOracle::new(&m);
        o.query_row(0).unwrap();
        o.query_row(1).unwrap();
        assert_eq!(o.calls(), 2);
    }
}
