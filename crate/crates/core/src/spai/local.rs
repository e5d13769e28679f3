use nalgebra::{DMatrix, DVector};

use crate::C64;

/// Result of a small dense least-squares solve.
#[derive(Debug, Clone)]
pub struct LstsqSolution {
    pub x: DVector<C64>,
    pub rank: usize,
    pub residual: f64,
}

impl LstsqSolution {
    pub fn rank_deficient(&self) -> bool {
        self.rank < self.x.len()
    }
}

/// Householder vector `v` (with `v[0] = 1`) and `tau` such that
/// `(I - tau v v^H) x = beta e_1` with real `beta`.
fn householder(x: &[C64]) -> (Vec<C64>, C64, C64) {
    let alpha = x[0];
    let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
    let n = x.len();
    if tail == 0.0 && alpha.im == 0.0 {
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[0] = C64::new(1.0, 0.0);
        return (v, C64::new(0.0, 0.0), alpha);
    }
    let norm = (alpha.norm_sqr() + tail).sqrt();
    let beta = if alpha.re >= 0.0 { -norm } else { norm };
    let tau = C64::new((beta - alpha.re) / beta, -alpha.im / beta);
    let scale = C64::new(1.0, 0.0) / (alpha - beta);
    let mut v = Vec::with_capacity(n);
    v.push(C64::new(1.0, 0.0));
    v.extend(x[1..].iter().map(|&z| z * scale));
    (v, tau, C64::new(beta, 0.0))
}

/// Minimises `||A x - b||_2` by Householder QR with column pivoting.
///
/// Rank is decided by `|R_kk| <= rtol * |R_00|`. Rank-deficient problems are
/// completed to a complete orthogonal decomposition so that the returned `x`
/// is the minimum-norm minimiser.
pub fn lstsq_col_piv(a: &DMatrix<C64>, b: &DVector<C64>, rtol: f64) -> LstsqSolution {
    let (m, n) = a.shape();
    let mut r = a.clone();
    let mut qtb = b.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut norms: Vec<f64> = (0..n).map(|j| r.column(j).norm_squared()).collect();
    let steps = m.min(n);

    for k in 0..steps {
        let p = (k..n)
            .max_by(|&i, &j| norms[i].partial_cmp(&norms[j]).unwrap())
            .unwrap();
        if p != k {
            r.swap_columns(k, p);
            perm.swap(k, p);
            norms.swap(k, p);
        }
        let col: Vec<C64> = (k..m).map(|i| r[(i, k)]).collect();
        let (v, tau, beta) = householder(&col);
        if tau != C64::new(0.0, 0.0) {
            for j in k..n {
                let s: C64 = (k..m).map(|i| v[i - k].conj() * r[(i, j)]).sum();
                let f = tau.conj() * s;
                for i in k..m {
                    r[(i, j)] -= v[i - k] * f;
                }
            }
            let s: C64 = (k..m).map(|i| v[i - k].conj() * qtb[i]).sum();
            let f = tau.conj() * s;
            for i in k..m {
                qtb[i] -= v[i - k] * f;
            }
        }
        r[(k, k)] = beta;
        for i in k + 1..m {
            r[(i, k)] = C64::new(0.0, 0.0);
        }
        for j in k + 1..n {
            norms[j] = (k + 1..m).map(|i| r[(i, j)].norm_sqr()).sum();
        }
    }

    let r00 = if steps > 0 { r[(0, 0)].norm() } else { 0.0 };
    let rank = (0..steps)
        .take_while(|&k| r[(k, k)].norm() > rtol * r00 && r00 > 0.0)
        .count();

    let mut y = DVector::<C64>::zeros(n);
    if rank == n {
        for i in (0..n).rev() {
            let mut s = qtb[i];
            for j in i + 1..n {
                s -= r[(i, j)] * y[j];
            }
            y[i] = s / r[(i, i)];
        }
    } else if rank > 0 {
        // [R11 R12] = T^H Z^H from the QR of its adjoint; x = Z T^{-H} c.
        let top = r.view((0, 0), (rank, n)).adjoint();
        let qr = top.qr();
        let z = qr.q();
        let t = qr.r();
        let mut w = DVector::<C64>::zeros(rank);
        for i in 0..rank {
            let mut s = qtb[i];
            for j in 0..i {
                s -= t[(j, i)].conj() * w[j];
            }
            w[i] = s / t[(i, i)].conj();
        }
        y = z * w;
    }
    let mut x = DVector::<C64>::zeros(n);
    for (j, &pj) in perm.iter().enumerate() {
        x[pj] = y[j];
    }
    let residual = (a * &x - b).norm();
    LstsqSolution { x, rank, residual }
}
