use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DenseVector, SparseMatrix};
use crate::spai::{Preconditioner, Side};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CgMethod {
    /// Plain conjugate gradient on a Hermitian positive definite operator.
    Cg,
    /// Conjugate gradient on the normal equations `B^H B x = B^H c`.
    Cgnr,
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: DenseVector,
    pub iterations: usize,
    pub converged: bool,
    pub method: CgMethod,
    /// `||B x - c|| / ||c||` for the operator actually iterated on.
    pub relative_residual: f64,
}

impl CgOutcome {
    /// Converts a non-converged outcome into an error.
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::Degenerate(format!(
                "{:?} did not converge in {} iterations (residual {:e})",
                self.method, self.iterations, self.relative_residual
            )))
        }
    }
}

trait Operator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &DenseVector) -> DenseVector;
    fn apply_adjoint(&self, x: &DenseVector) -> DenseVector;
}

impl Operator for SparseMatrix {
    fn dim(&self) -> usize {
        SparseMatrix::dim(self)
    }
    fn apply(&self, x: &DenseVector) -> DenseVector {
        self.mul_vec(x)
    }
    fn apply_adjoint(&self, x: &DenseVector) -> DenseVector {
        self.adjoint_mul_vec(x)
    }
}

struct Product<'a> {
    left: &'a SparseMatrix,
    right: &'a SparseMatrix,
}

impl Operator for Product<'_> {
    fn dim(&self) -> usize {
        self.left.dim()
    }
    fn apply(&self, x: &DenseVector) -> DenseVector {
        self.left.mul_vec(&self.right.mul_vec(x))
    }
    fn apply_adjoint(&self, x: &DenseVector) -> DenseVector {
        self.right.adjoint_mul_vec(&self.left.adjoint_mul_vec(x))
    }
}

fn dot(a: &DenseVector, b: &DenseVector) -> C64 {
    a.dotc(b)
}

/// Returns `None` when a non-positive curvature `p^H A p <= 0` shows the
/// operator is not positive definite.
fn cg(op: &dyn Operator, b: &DenseVector, tol: f64, max_iter: usize) -> Option<CgOutcome> {
    let n = op.dim();
    let bn = b.norm();
    let mut x = DenseVector::zeros(n);
    if bn == 0.0 {
        return Some(CgOutcome {
            x,
            iterations: 0,
            converged: true,
            method: CgMethod::Cg,
            relative_residual: 0.0,
        });
    }
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = dot(&r, &r).re;
    let mut it = 0;
    while it < max_iter {
        let ap = op.apply(&p);
        let pap = dot(&p, &ap);
        if !(pap.re > 0.0) || pap.im.abs() > 1e-8 * pap.re {
            return None;
        }
        let alpha = rr / pap.re;
        x.axpy(C64::new(alpha, 0.0), &p, C64::new(1.0, 0.0));
        r.axpy(C64::new(-alpha, 0.0), &ap, C64::new(1.0, 0.0));
        it += 1;
        let rr_new = dot(&r, &r).re;
        if rr_new.sqrt() <= tol * bn {
            rr = rr_new;
            break;
        }
        let beta = rr_new / rr;
        rr = rr_new;
        p = &r + &p * C64::new(beta, 0.0);
    }
    let res = (b - op.apply(&x)).norm() / bn;
    Some(CgOutcome {
        x,
        iterations: it,
        converged: rr.sqrt() <= tol * bn && res <= 10.0 * tol,
        method: CgMethod::Cg,
        relative_residual: res,
    })
}

/// CGNR: CG on `B^H B x = B^H c`, stopping on the true residual `||B x - c||`.
fn cgnr(op: &dyn Operator, c: &DenseVector, tol: f64, max_iter: usize) -> CgOutcome {
    let n = op.dim();
    let cn = c.norm();
    let mut x = DenseVector::zeros(n);
    if cn == 0.0 {
        return CgOutcome {
            x,
            iterations: 0,
            converged: true,
            method: CgMethod::Cgnr,
            relative_residual: 0.0,
        };
    }
    let mut r = c.clone();
    let mut z = op.apply_adjoint(&r);
    let mut p = z.clone();
    let mut zz = dot(&z, &z).re;
    let mut it = 0;
    let mut converged = false;
    while it < max_iter {
        let w = op.apply(&p);
        let ww = dot(&w, &w).re;
        if ww == 0.0 {
            break;
        }
        let alpha = zz / ww;
        x.axpy(C64::new(alpha, 0.0), &p, C64::new(1.0, 0.0));
        r.axpy(C64::new(-alpha, 0.0), &w, C64::new(1.0, 0.0));
        it += 1;
        if r.norm() <= tol * cn {
            converged = true;
            break;
        }
        z = op.apply_adjoint(&r);
        let zz_new = dot(&z, &z).re;
        let beta = zz_new / zz;
        zz = zz_new;
        p = &z + &p * C64::new(beta, 0.0);
    }
    let res = (c - op.apply(&x)).norm() / cn;
    CgOutcome {
        x,
        iterations: it,
        converged: converged && res <= 10.0 * tol,
        method: CgMethod::Cgnr,
        relative_residual: res,
    }
}

/// Conjugate-gradient solve of `A x = b`, optionally SPAI-preconditioned.
///
/// Without a preconditioner a Hermitian `A` is tried with plain CG; a
/// non-Hermitian `A`, or a Hermitian one that reveals non-positive curvature,
/// is solved with CGNR. With a preconditioner the transformed operator (`MA`
/// for left, `AM` for right) is generally non-Hermitian and always uses CGNR.
/// Non-convergence is reported through [`CgOutcome::converged`].
pub fn cg_solve(
    a: &SparseMatrix,
    b: &DenseVector,
    tol: f64,
    max_iter: usize,
    precond: Option<&Preconditioner>,
) -> Result<CgOutcome> {
    if !(tol > 0.0) {
        return Err(crate::error::contract("tol must be positive"));
    }
    if b.len() != a.dim() {
        return Err(Error::Dimension {
            expected: a.dim(),
            got: b.len(),
        });
    }
    match precond {
        None => {
            if a.is_hermitian() {
                if let Some(out) = cg(a, b, tol, max_iter) {
                    return Ok(out);
                }
            }
            Ok(cgnr(a, b, tol, max_iter))
        }
        Some(p) => {
            let m = p.matrix();
            if m.dim() != a.dim() {
                return Err(Error::Dimension {
                    expected: a.dim(),
                    got: m.dim(),
                });
            }
            match p.side() {
                Side::Left => {
                    let op = Product { left: m, right: a };
                    Ok(cgnr(&op, &m.mul_vec(b), tol, max_iter))
                }
                Side::Right => {
                    let op = Product { left: a, right: m };
                    let mut out = cgnr(&op, b, tol, max_iter);
                    out.x = m.mul_vec(&out.x);
                    Ok(out)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense_solve;
    use crate::linalg::generate::random_vector;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn identity_one_iteration() {
        let b = random_vector(10, 1);
        let out = cg_solve(&SparseMatrix::identity(10), &b, 1e-12, 100, None).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.method, CgMethod::Cg);
        assert!((out.x - b).norm() < 1e-14);
    }

    #[test]
    fn spd_tridiagonal_matches_dense() {
        let a = SparseMatrix::tridiagonal(64, c(-1.0), c(2.0), c(-1.0));
        let b = random_vector(64, 2);
        let out = cg_solve(&a, &b, 1e-10, 1000, None).unwrap();
        assert!(out.converged);
        assert_eq!(out.method, CgMethod::Cg);
        let x = dense_solve(&a, &b).unwrap();
        assert!((&out.x - &x).norm() / x.norm() < 1e-8);
    }

    #[test]
    fn indefinite_hermitian_falls_back_to_cgnr() {
        let a = SparseMatrix::from_diagonal(&[c(1.0), c(-2.0), c(3.0)]);
        let b = DenseVector::from_element(3, c(1.0));
        let out = cg_solve(&a, &b, 1e-12, 100, None).unwrap();
        assert_eq!(out.method, CgMethod::Cgnr);
        assert!(out.converged);
        assert!((out.x[1] - c(-0.5)).norm() < 1e-10);
    }

    #[test]
    fn max_iter_flags_non_convergence() {
        let a = SparseMatrix::tridiagonal(64, c(-1.0), c(2.0), c(-1.0));
        let b = random_vector(64, 3);
        let out = cg_solve(&a, &b, 1e-12, 3, None).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 3);
        assert!(out.require_converged().is_err());
    }

    #[test]
    fn rejects_nonpositive_tol() {
        let a = SparseMatrix::identity(2);
        assert!(cg_solve(&a, &DenseVector::zeros(2), 0.0, 10, None).is_err());
    }
}
