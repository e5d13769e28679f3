use nalgebra::{DMatrix, SymmetricEigen, SVD};

use crate::error::{contract, Error, Result};
use crate::linalg::{max_abs, DenseVector, SparseMatrix};
use crate::C64;

/// Largest dimension handled by the dense reference routines.
pub const DENSE_CAP: usize = 4096;

/// `sigma_min < SINGULAR_RTOL * sigma_max` is treated as singular.
pub const SINGULAR_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConditionReport {
    pub kappa: f64,
    pub sigma_max: f64,
    pub sigma_min: f64,
}

fn check_cap(n: usize) -> Result<()> {
    if n > DENSE_CAP {
        return Err(Error::TooLarge {
            dim: n,
            cap: DENSE_CAP,
        });
    }
    Ok(())
}

pub fn singular_values(a: &DMatrix<C64>) -> Vec<f64> {
    let svd = SVD::new(a.clone(), false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

/// Spectral condition number via a full SVD of the densified matrix.
pub fn condition_number(a: &SparseMatrix) -> Result<ConditionReport> {
    check_cap(a.dim())?;
    condition_number_dense(&a.to_dense())
}

pub fn condition_number_dense(a: &DMatrix<C64>) -> Result<ConditionReport> {
    check_cap(a.nrows())?;
    let s = singular_values(a);
    let sigma_max = s.first().copied().unwrap_or(0.0);
    let sigma_min = s.last().copied().unwrap_or(0.0);
    if !(sigma_min >= SINGULAR_RTOL * sigma_max) || sigma_max == 0.0 {
        return Err(Error::Singular {
            sigma_min,
            sigma_max,
        });
    }
    Ok(ConditionReport {
        kappa: sigma_max / sigma_min,
        sigma_max,
        sigma_min,
    })
}

/// LU solve with a residual certificate `||Ax - b|| / ||b|| <= 1e-10`.
pub fn dense_solve(a: &SparseMatrix, b: &DenseVector) -> Result<DenseVector> {
    check_cap(a.dim())?;
    dense_solve_matrix(&a.to_dense(), b)
}

pub fn dense_solve_matrix(a: &DMatrix<C64>, b: &DenseVector) -> Result<DenseVector> {
    let n = a.nrows();
    check_cap(n)?;
    if b.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: b.len(),
        });
    }
    let lu = a.clone().lu();
    let x = lu.solve(b).ok_or(Error::Singular {
        sigma_min: 0.0,
        sigma_max: a.norm(),
    })?;
    let bn = b.norm();
    let res = (a * &x - b).norm();
    if bn > 0.0 && res > 1e-10 * bn {
        let s = singular_values(a);
        return Err(Error::Singular {
            sigma_min: *s.last().unwrap(),
            sigma_max: s[0],
        });
    }
    Ok(x)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub eigenvalues: Vec<f64>,
    /// Columns are orthonormal eigenvectors, in the order of `eigenvalues`.
    pub eigenvectors: DMatrix<C64>,
}

impl Eigensystem {
    pub fn new(h: &DMatrix<C64>) -> Result<Self> {
        check_cap(h.nrows())?;
        let herm_err = max_abs(&(h - h.adjoint()));
        if herm_err > 1e-12 * max_abs(h).max(1.0) {
            return Err(contract("eigensystem requires a Hermitian matrix"));
        }
        let eig = SymmetricEigen::new(h.clone());
        let mut order: Vec<usize> = (0..h.nrows()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigenvectors =
            DMatrix::from_fn(h.nrows(), h.nrows(), |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(Eigensystem {
            eigenvalues,
            eigenvectors,
        })
    }

    /// Coefficients `beta_j = <u_j | v>`.
    pub fn expand(&self, v: &DenseVector) -> DenseVector {
        self.eigenvectors.adjoint() * v
    }

    /// `sum_j f(lambda_j) u_j u_j^H`.
    pub fn function(&self, f: impl Fn(f64) -> C64) -> DMatrix<C64> {
        let n = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for c in 0..n {
            let fc = f(self.eigenvalues[c]);
            for r in 0..n {
                scaled[(r, c)] *= fc;
            }
        }
        scaled * self.eigenvectors.adjoint()
    }

    pub fn reconstruct(&self) -> DMatrix<C64> {
        self.function(|l| C64::new(l, 0.0))
    }
}

/// Direct solve for banded sparse systems using LU with partial pivoting.
///
/// Intended for FEM matrices that exceed the dense cap; cost is
/// `O(N * kl * (kl + ku))` for lower/upper bandwidths `kl`, `ku`.
pub fn banded_solve(a: &SparseMatrix, b: &DenseVector) -> Result<DenseVector> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: b.len(),
        });
    }
    let (mut kl, mut ku) = (0usize, 0usize);
    for (i, j, _) in a.iter() {
        if j < i {
            kl = kl.max(i - j);
        } else {
            ku = ku.max(j - i);
        }
    }
    // Row i stores columns [i - kl, i + kl + ku]; pivoting widens the upper band by kl.
    let width = 2 * kl + ku + 1;
    let zero = C64::new(0.0, 0.0);
    let mut band = vec![zero; n * width];
    let idx = |i: usize, j: usize| i * width + (j + kl - i);
    for (i, j, v) in a.iter() {
        band[idx(i, j)] = v;
    }
    let mut rhs: Vec<C64> = b.iter().copied().collect();
    let scale = a.max_abs_row_sum().max(f64::MIN_POSITIVE);

    for k in 0..n {
        let last = (k + kl).min(n - 1);
        let mut p = k;
        let mut best = band[idx(k, k)].norm();
        for i in k + 1..=last {
            let v = band[idx(i, k)].norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best <= 1e-14 * scale {
            return Err(Error::Singular {
                sigma_min: best,
                sigma_max: scale,
            });
        }
        let jmax = (k + kl + ku).min(n - 1);
        if p != k {
            for j in k..=jmax {
                band.swap(idx(k, j), idx(p, j));
            }
            rhs.swap(k, p);
        }
        let pivot = band[idx(k, k)];
        for i in k + 1..=last {
            let f = band[idx(i, k)] / pivot;
            if f == zero {
                continue;
            }
            band[idx(i, k)] = zero;
            for j in k + 1..=jmax {
                let u = band[idx(k, j)];
                band[idx(i, j)] -= f * u;
            }
            let r = rhs[k];
            rhs[i] -= f * r;
        }
    }
    let mut x = vec![zero; n];
    for i in (0..n).rev() {
        let jmax = (i + kl + ku).min(n - 1);
        let mut s = rhs[i];
        for j in i + 1..=jmax {
            s -= band[idx(i, j)] * x[j];
        }
        x[i] = s / band[idx(i, i)];
    }
    Ok(DenseVector::from_vec(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::generate::{random_dense, random_vector};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn identity_condition_is_one() {
        let r = condition_number(&SparseMatrix::identity(6)).unwrap();
        assert!((r.kappa - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diag_condition() {
        let r = condition_number(&SparseMatrix::from_diagonal(&[c(1.0), c(10.0)])).unwrap();
        assert!((r.kappa - 10.0).abs() < 1e-10);
        assert!((r.sigma_max - 10.0).abs() < 1e-12);
    }

    #[test]
    fn singular_detected() {
        let a = SparseMatrix::from_diagonal(&[c(1.0), c(0.0), c(2.0)]);
        assert!(matches!(condition_number(&a), Err(Error::Singular { .. })));
        assert!(dense_solve(&a, &DenseVector::from_element(3, c(1.0))).is_err());
    }

    #[test]
    fn dense_solve_examples() {
        let b = DenseVector::from_vec(vec![c(1.0), c(-2.0), C64::new(0.0, 3.0)]);
        assert_eq!(dense_solve(&SparseMatrix::identity(3), &b).unwrap(), b);
        let x = dense_solve(
            &SparseMatrix::from_diagonal(&[c(2.0), c(4.0)]),
            &DenseVector::from_vec(vec![c(2.0), c(4.0)]),
        )
        .unwrap();
        assert!((x[0] - c(1.0)).norm() < 1e-15 && (x[1] - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn dense_solve_random_residual() {
        let a = random_dense(32, 5);
        let b = random_vector(32, 6);
        let x = dense_solve_matrix(&a, &b).unwrap();
        assert!((&a * &x - &b).norm() / b.norm() <= 1e-10);
    }

    #[test]
    fn eigensystem_reconstructs_and_preserves_norm() {
        let a = random_dense(8, 2);
        let h = (&a + a.adjoint()) * c(0.5);
        let e = Eigensystem::new(&h).unwrap();
        assert!(max_abs(&(e.reconstruct() - &h)) < 1e-12);
        let v = random_vector(8, 3);
        assert!((e.expand(&v).norm() - v.norm()).abs() < 1e-12);
    }

    #[test]
    fn banded_matches_dense() {
        let n = 40;
        let mut rows = vec![Vec::new(); n];
        let r = random_dense(n, 9);
        for i in 0..n {
            for j in i.saturating_sub(2)..(i + 3).min(n) {
                rows[i].push((j, r[(i, j)]));
            }
        }
        let a = SparseMatrix::from_rows(rows);
        let b = random_vector(n, 10);
        let x1 = banded_solve(&a, &b).unwrap();
        let x2 = dense_solve(&a, &b).unwrap();
        assert!((x1 - x2).norm() < 1e-9);
    }
}
