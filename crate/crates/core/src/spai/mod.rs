//! Sparse approximate inverse (SPAI) preconditioning.
//!
//! `M` minimises `||MA - I||_F` (left) or `||AM - I||_F` (right) subject to an
//! a-priori sparsity pattern. The Frobenius objective separates into one small
//! least-squares problem per unit vector `e_k`, each of which touches only the
//! rows of `A` named by the pattern, so a row of `M` can be produced from local
//! oracle queries alone.
//!
//! Internally the left problem for row `k` of `M` is the right problem for
//! column `k` of `M^T` against `A^T`: `min || A^T m_k - e_k ||`.

mod local;

use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::linalg::{mmio, RowOracle, SparseMatrix};
use crate::C64;

pub use local::{lstsq_col_piv, LstsqSolution};

/// Relative pivot threshold used to decide local rank.
pub const LOCAL_RANK_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `M A x = M b`.
    #[default]
    Left,
    /// `A M y = b`, `x = M y`.
    Right,
}

/// Allowed support of the `k`-th row (left) or column (right) of `M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    level: Option<u8>,
    supports: Vec<Vec<usize>>,
}

impl SparsityPattern {
    /// Level 0 is the diagonal, level 1 the transposed pattern of `A` (plus the
    /// diagonal), level 2 the boolean square of level 1.
    pub fn build(a: &SparseMatrix, level: u8) -> Result<Self> {
        let n = a.dim();
        let diag: Vec<Vec<usize>> = (0..n).map(|k| vec![k]).collect();
        if level == 0 {
            return Ok(SparsityPattern {
                level: Some(0),
                supports: diag,
            });
        }
        if level > 2 {
            return Err(contract(format!(
                "pattern level must be 0, 1 or 2, got {level}"
            )));
        }
        // Column k of A, i.e. row k of A^T.
        let mut cols: Vec<BTreeSet<usize>> = (0..n).map(|k| BTreeSet::from([k])).collect();
        for (i, j, _) in a.iter() {
            cols[j].insert(i);
        }
        let l1: Vec<Vec<usize>> = cols.into_iter().map(|s| s.into_iter().collect()).collect();
        if level == 1 {
            return Ok(SparsityPattern {
                level: Some(1),
                supports: l1,
            });
        }
        let l2 = l1
            .iter()
            .map(|s1| {
                let mut s: BTreeSet<usize> = BTreeSet::new();
                for &i in s1 {
                    s.extend(l1[i].iter().copied());
                }
                s.into_iter().collect()
            })
            .collect();
        Ok(SparsityPattern {
            level: Some(2),
            supports: l2,
        })
    }

    /// Every index allowed everywhere; recovers the exact inverse for nonsingular `A`.
    pub fn full(n: usize) -> Self {
        SparsityPattern {
            level: None,
            supports: vec![(0..n).collect(); n],
        }
    }

    pub fn from_supports(supports: Vec<Vec<usize>>) -> Result<Self> {
        let n = supports.len();
        let mut out = Vec::with_capacity(n);
        for s in supports {
            if s.is_empty() {
                return Err(contract("pattern support must be nonempty"));
            }
            let set: BTreeSet<usize> = s.into_iter().collect();
            if let Some(&bad) = set.iter().find(|&&i| i >= n) {
                return Err(Error::Index { index: bad, dim: n });
            }
            out.push(set.into_iter().collect());
        }
        Ok(SparsityPattern {
            level: None,
            supports: out,
        })
    }

    pub fn level(&self) -> Option<u8> {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.supports.len()
    }

    pub fn support(&self, k: usize) -> &[usize] {
        &self.supports[k]
    }

    pub fn max_support(&self) -> usize {
        self.supports.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Local least-squares problem for unit vector `k`.
#[derive(Debug, Clone)]
pub struct SpaiLocalProblem {
    pub k: usize,
    /// Local row set (positions of nonzeros of `A^T m_k`), always containing `k`.
    pub rows: Vec<usize>,
    /// Local column set = the pattern support.
    pub cols: Vec<usize>,
    /// `rows.len() x cols.len()` submatrix of `A^T`.
    pub matrix: DMatrix<C64>,
    pub unit: DVector<C64>,
}

impl SpaiLocalProblem {
    /// Gathers `A^T[rows, cols]` with one row query per support index.
    pub fn gather(a: &(impl RowOracle + ?Sized), support: &[usize], k: usize) -> Result<Self> {
        let n = a.dim();
        if k >= n {
            return Err(Error::Index { index: k, dim: n });
        }
        if support.is_empty() {
            return Err(contract("pattern support must be nonempty"));
        }
        let queried: Vec<Vec<(usize, C64)>> = support
            .iter()
            .map(|&j| a.query_row(j))
            .collect::<Result<_>>()?;
        let mut rows: BTreeSet<usize> = BTreeSet::from([k]);
        for r in &queried {
            rows.extend(r.iter().map(|&(c, _)| c));
        }
        let rows: Vec<usize> = rows.into_iter().collect();
        let mut matrix = DMatrix::zeros(rows.len(), support.len());
        for (jc, r) in queried.iter().enumerate() {
            for &(c, v) in r {
                let ir = rows.binary_search(&c).unwrap();
                matrix[(ir, jc)] = v;
            }
        }
        let mut unit = DVector::zeros(rows.len());
        unit[rows.binary_search(&k).unwrap()] = C64::new(1.0, 0.0);
        Ok(SpaiLocalProblem {
            k,
            rows,
            cols: support.to_vec(),
            matrix,
            unit,
        })
    }

    /// Normal-equations residual `||Â^H (Â m - ê)||` for a candidate `m`.
    pub fn optimality_gap(&self, m: &DVector<C64>) -> f64 {
        (self.matrix.adjoint() * (&self.matrix * m - &self.unit)).norm()
    }
}

/// One solved local problem: the sparse row (left) or column (right) of `M`.
#[derive(Debug, Clone)]
pub struct LocalSolution {
    pub entries: Vec<(usize, C64)>,
    pub residual: f64,
    pub rank_deficient: bool,
}

/// Solves `min || A^T[:, J] m - e_k ||` for `J = pattern.support(k)`.
///
/// For the left side the result is row `k` of `M`; pass `A^T` as the oracle
/// to obtain column `k` of a right preconditioner.
pub fn solve_local(
    a: &(impl RowOracle + ?Sized),
    pattern: &SparsityPattern,
    k: usize,
) -> Result<LocalSolution> {
    if k >= pattern.dim() {
        return Err(Error::Index {
            index: k,
            dim: pattern.dim(),
        });
    }
    let p = SpaiLocalProblem::gather(a, pattern.support(k), k)?;
    let sol = lstsq_col_piv(&p.matrix, &p.unit, LOCAL_RANK_RTOL);
    let entries = p
        .cols
        .iter()
        .zip(sol.x.iter())
        .filter(|(_, v)| **v != C64::new(0.0, 0.0))
        .map(|(&j, &v)| (j, v))
        .collect();
    Ok(LocalSolution {
        entries,
        residual: sol.residual,
        rank_deficient: sol.rank_deficient(),
    })
}

/// Assembled sparse approximate inverse.
#[derive(Debug, Clone)]
pub struct Preconditioner {
    matrix: SparseMatrix,
    residuals: Vec<f64>,
    eps_pre: f64,
    side: Side,
    level: Option<u8>,
    rank_deficient: Vec<usize>,
}

impl Preconditioner {
    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Largest local residual.
    pub fn eps_pre(&self) -> f64 {
        self.eps_pre
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn level(&self) -> Option<u8> {
        self.level
    }

    /// Indices whose local problem was rank deficient (minimum-norm solution used).
    pub fn rank_deficient(&self) -> &[usize] {
        &self.rank_deficient
    }

    /// `sum_k residual_k^2`, equal to `||MA - I||_F^2` (left) or `||AM - I||_F^2` (right).
    pub fn frobenius_objective(&self) -> f64 {
        self.residuals.iter().map(|r| r * r).sum()
    }

    /// The preconditioned matrix `MA` or `AM`.
    pub fn apply_to(&self, a: &SparseMatrix) -> SparseMatrix {
        match self.side {
            Side::Left => self.matrix.matmul(a),
            Side::Right => a.matmul(&self.matrix),
        }
    }

    pub fn metadata(&self) -> PreconditionerMetadata {
        PreconditionerMetadata {
            level: self.level,
            eps_pre: self.eps_pre,
            side: self.side,
            residuals: self.residuals.clone(),
        }
    }

    /// Writes `M` as Matrix Market plus a JSON sidecar `<path>.json`.
    pub fn export(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        mmio::write_matrix_market(&self.matrix, path, Some("sparse approximate inverse"))?;
        std::fs::write(
            sidecar_path(path),
            serde_json::to_string_pretty(&self.metadata())?,
        )?;
        Ok(())
    }

    pub fn import(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let matrix = mmio::read_matrix_market(path)?;
        let meta: PreconditionerMetadata =
            serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)?;
        if meta.residuals.len() != matrix.dim() {
            return Err(Error::Dimension {
                expected: matrix.dim(),
                got: meta.residuals.len(),
            });
        }
        Ok(Preconditioner {
            matrix,
            eps_pre: meta.eps_pre,
            side: meta.side,
            level: meta.level,
            residuals: meta.residuals,
            rank_deficient: Vec::new(),
        })
    }
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreconditionerMetadata {
    pub level: Option<u8>,
    pub eps_pre: f64,
    pub side: Side,
    pub residuals: Vec<f64>,
}

/// Solves all `N` local problems (in parallel) and assembles `M`.
///
/// Each local problem depends only on `A` and the pattern, so the result is
/// identical for any execution order.
pub fn assemble_preconditioner(
    a: &SparseMatrix,
    pattern: &SparsityPattern,
    side: Side,
) -> Result<Preconditioner> {
    let n = a.dim();
    if pattern.dim() != n {
        return Err(Error::Dimension {
            expected: n,
            got: pattern.dim(),
        });
    }
    let at;
    let oracle: &SparseMatrix = match side {
        Side::Left => a,
        Side::Right => {
            at = a.transpose();
            &at
        }
    };
    let sols: Vec<LocalSolution> = (0..n)
        .into_par_iter()
        .map(|k| solve_local(oracle, pattern, k))
        .collect::<Result<_>>()?;
    let residuals: Vec<f64> = sols.iter().map(|s| s.residual).collect();
    let eps_pre = residuals.iter().copied().fold(0.0, f64::max);
    let rank_deficient = sols
        .iter()
        .enumerate()
        .filter(|(_, s)| s.rank_deficient)
        .map(|(k, _)| k)
        .collect();
    let mut rows = vec![Vec::new(); n];
    for (k, s) in sols.into_iter().enumerate() {
        match side {
            Side::Left => rows[k] = s.entries,
            Side::Right => {
                for (i, v) in s.entries {
                    rows[i].push((k, v));
                }
            }
        }
    }
    Ok(Preconditioner {
        matrix: SparseMatrix::from_rows(rows),
        residuals,
        eps_pre,
        side,
        level: pattern.level(),
        rank_deficient,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    /// `sqrt(d) * eps_pre`.
    pub radius: f64,
    pub applicable: bool,
    /// `(1 + radius) / (1 - radius)` when `radius < 1`.
    pub bound: Option<f64>,
}

/// Condition-number bound for the preconditioned matrix, with `d` the
/// maximum number of nonzeros per row of `A`.
pub fn bound_check(precond: &Preconditioner, d: usize) -> BoundCheck {
    bound_from_residual(precond.eps_pre(), d)
}

pub fn bound_from_residual(eps_pre: f64, d: usize) -> BoundCheck {
    let radius = (d as f64).sqrt() * eps_pre;
    let applicable = radius < 1.0;
    BoundCheck {
        radius,
        applicable,
        bound: applicable.then(|| (1.0 + radius) / (1.0 - radius)),
    }
}

/// Row `k` of the preconditioned matrix computed from local queries only.
///
/// Left: `row_k(MA) = sum_i M_ki row_i(A)`, one `A` query per nonzero of row
/// `k` of `M`. Right: `row_k(AM) = sum_j A_kj row_j(M)`, a single `A` query.
pub fn preconditioned_row_oracle(
    a: &(impl RowOracle + ?Sized),
    precond: &Preconditioner,
    k: usize,
) -> Result<Vec<(usize, C64)>> {
    let n = a.dim();
    if k >= n {
        return Err(Error::Index { index: k, dim: n });
    }
    let mut acc: Vec<(usize, C64)> = Vec::new();
    match precond.side {
        Side::Left => {
            let (mc, mv) = precond.matrix.row(k);
            for (&i, &m) in mc.iter().zip(mv) {
                acc.extend(a.query_row(i)?.into_iter().map(|(j, v)| (j, m * v)));
            }
        }
        Side::Right => {
            for (j, v) in a.query_row(k)? {
                let (mc, mv) = precond.matrix.row(j);
                acc.extend(mc.iter().zip(mv).map(|(&c, &m)| (c, v * m)));
            }
        }
    }
    acc.sort_by_key(|&(j, _)| j);
    let mut out: Vec<(usize, C64)> = Vec::with_capacity(acc.len());
    for (j, v) in acc {
        match out.last_mut() {
            Some((lj, lv)) if *lj == j => *lv += v,
            _ => out.push((j, v)),
        }
    }
    out.retain(|&(_, v)| v != C64::new(0.0, 0.0));
    Ok(out)
}

/// Row oracle view of `MA` / `AM`.
pub struct PreconditionedOracle<'a, O: RowOracle + ?Sized> {
    pub a: &'a O,
    pub precond: &'a Preconditioner,
}

impl<O: RowOracle + ?Sized> RowOracle for PreconditionedOracle<'_, O> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn query_row(&self, k: usize) -> Result<Vec<(usize, C64)>> {
        preconditioned_row_oracle(self.a, self.precond, k)
    }
}

/// Element `j` of the preconditioned right-hand side: `(Mb)_j` for the left
/// side, `b_j` for the right side.
pub fn preconditioned_rhs_element(
    precond: &Preconditioner,
    b: impl Fn(usize) -> Result<C64>,
    j: usize,
) -> Result<C64> {
    let n = precond.matrix.dim();
    if j >= n {
        return Err(Error::Index { index: j, dim: n });
    }
    match precond.side {
        Side::Left => {
            let (mc, mv) = precond.matrix.row(j);
            let mut s = C64::new(0.0, 0.0);
            for (&i, &m) in mc.iter().zip(mv) {
                s += m * b(i)?;
            }
            Ok(s)
        }
        Side::Right => b(j),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::generate::{diagonally_dominant, random_vector};
    use crate::linalg::{condition_number, CountingOracle, DenseVector};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn tri(n: usize) -> SparseMatrix {
        SparseMatrix::tridiagonal(n, c(-1.0), c(2.0), c(-1.0))
    }

    #[test]
    fn level0_is_diagonal() {
        let p = SparsityPattern::build(&tri(8), 0).unwrap();
        for k in 0..8 {
            assert_eq!(p.support(k), &[k]);
        }
    }

    #[test]
    fn tridiagonal_levels() {
        let n = 10;
        let p1 = SparsityPattern::build(&tri(n), 1).unwrap();
        let p2 = SparsityPattern::build(&tri(n), 2).unwrap();
        for k in 0..n {
            let want1: Vec<usize> = (k.saturating_sub(1)..(k + 2).min(n)).collect();
            let want2: Vec<usize> = (k.saturating_sub(2)..(k + 3).min(n)).collect();
            assert_eq!(p1.support(k), want1.as_slice());
            assert_eq!(p2.support(k), want2.as_slice());
        }
        assert!(SparsityPattern::build(&tri(n), 3).is_err());
    }

    #[test]
    fn level2_is_boolean_square_of_pattern() {
        let a = diagonally_dominant(30, 3, 2.0, 5);
        let p1 = SparsityPattern::build(&a, 1).unwrap();
        let p2 = SparsityPattern::build(&a, 2).unwrap();
        // Boolean product of the transposed pattern with itself, computed densely.
        let n = a.dim();
        let mut pat = vec![vec![false; n]; n];
        for k in 0..n {
            pat[k][k] = true;
        }
        for (i, j, _) in a.iter() {
            pat[j][i] = true;
        }
        for k in 0..n {
            let sq: Vec<usize> = (0..n)
                .filter(|&j| (0..n).any(|m| pat[k][m] && pat[m][j]))
                .collect();
            assert_eq!(p2.support(k), sq.as_slice());
            assert!(p1.support(k).iter().all(|i| p2.support(k).contains(i)));
        }
    }

    #[test]
    fn identity_and_diagonal_are_exact() {
        let id = SparseMatrix::identity(6);
        let m = assemble_preconditioner(&id, &SparsityPattern::build(&id, 1).unwrap(), Side::Left)
            .unwrap();
        assert_eq!(m.matrix(), &id);
        assert_eq!(m.eps_pre(), 0.0);

        let d: Vec<C64> = (0..6).map(|i| C64::new(1.0 + i as f64, 0.5)).collect();
        let a = SparseMatrix::from_diagonal(&d);
        for level in 0..=2 {
            let p = assemble_preconditioner(
                &a,
                &SparsityPattern::build(&a, level).unwrap(),
                Side::Left,
            )
            .unwrap();
            assert!(p.eps_pre() < 1e-15);
            for k in 0..6 {
                assert!((p.matrix().get(k, k) - C64::new(1.0, 0.0) / d[k]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn full_support_recovers_inverse() {
        let a = tri(12);
        let inv = a.to_dense().try_inverse().unwrap();
        for side in [Side::Left, Side::Right] {
            let p = assemble_preconditioner(&a, &SparsityPattern::full(12), side).unwrap();
            let m = p.matrix().to_dense();
            assert!(crate::linalg::max_abs(&(m - &inv)) < 1e-10, "{side:?}");
        }
    }

    #[test]
    fn frobenius_objective_matches_dense() {
        let a = tri(64);
        for side in [Side::Left, Side::Right] {
            let p =
                assemble_preconditioner(&a, &SparsityPattern::build(&a, 1).unwrap(), side).unwrap();
            let ma = p.apply_to(&a).to_dense();
            let direct = (ma - DMatrix::<C64>::identity(64, 64)).norm_squared();
            assert!((p.frobenius_objective() - direct).abs() < 1e-12 * direct.max(1.0));
        }
    }

    #[test]
    fn local_solutions_satisfy_normal_equations() {
        let a = diagonally_dominant(40, 4, 1.5, 2);
        let pat = SparsityPattern::build(&a, 2).unwrap();
        for k in 0..40 {
            let pr = SpaiLocalProblem::gather(&a, pat.support(k), k).unwrap();
            let sol = lstsq_col_piv(&pr.matrix, &pr.unit, LOCAL_RANK_RTOL);
            assert!(pr.optimality_gap(&sol.x) <= 1e-8 * pr.matrix.norm());
        }
    }

    #[test]
    fn parallel_and_sequential_assembly_agree_bitwise() {
        let a = diagonally_dominant(50, 4, 1.2, 9);
        let pat = SparsityPattern::build(&a, 1).unwrap();
        let par = assemble_preconditioner(&a, &pat, Side::Left).unwrap();
        let mut rows = Vec::new();
        for k in (0..50).rev() {
            rows.push((k, solve_local(&a, &pat, k).unwrap()));
        }
        rows.sort_by_key(|r| r.0);
        let seq = SparseMatrix::from_rows(rows.into_iter().map(|(_, s)| s.entries).collect());
        assert_eq!(par.matrix(), &seq);
    }

    #[test]
    fn bound_examples() {
        let b = bound_from_residual(0.0, 5);
        assert_eq!(b.bound, Some(1.0));
        let b = bound_from_residual(1.0 / 6.0, 4);
        assert!((b.radius - 1.0 / 3.0).abs() < 1e-15);
        assert!((b.bound.unwrap() - 2.0).abs() < 1e-12);
        assert!(!bound_from_residual(0.5, 4).applicable);
    }

    #[test]
    fn preconditioned_rows_match_dense_product() {
        let a = diagonally_dominant(32, 3, 1.3, 17);
        for side in [Side::Left, Side::Right] {
            let p =
                assemble_preconditioner(&a, &SparsityPattern::build(&a, 1).unwrap(), side).unwrap();
            let dense = p.apply_to(&a).to_dense();
            for k in 0..32 {
                let row = preconditioned_row_oracle(&a, &p, k).unwrap();
                let mut got = vec![C64::new(0.0, 0.0); 32];
                for (j, v) in row {
                    got[j] = v;
                }
                for j in 0..32 {
                    assert!((got[j] - dense[(k, j)]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn trivial_preconditioned_rows() {
        let a = diagonally_dominant(10, 2, 2.0, 1);
        let id = SparseMatrix::identity(10);
        let p_id =
            assemble_preconditioner(&id, &SparsityPattern::build(&id, 0).unwrap(), Side::Left)
                .unwrap();
        assert_eq!(
            preconditioned_row_oracle(&a, &p_id, 4).unwrap(),
            a.query_row(4).unwrap()
        );
        let p = assemble_preconditioner(&a, &SparsityPattern::build(&a, 1).unwrap(), Side::Left)
            .unwrap();
        assert_eq!(
            preconditioned_row_oracle(&id, &p, 4).unwrap(),
            p.matrix().query_row(4).unwrap()
        );
    }

    #[test]
    fn rhs_elements_match_dense() {
        let a = diagonally_dominant(32, 3, 1.3, 3);
        let p = assemble_preconditioner(&a, &SparsityPattern::build(&a, 1).unwrap(), Side::Left)
            .unwrap();
        let b = random_vector(32, 4);
        let mb = p.matrix().mul_vec(&b);
        for j in 0..32 {
            let e = preconditioned_rhs_element(&p, |i| Ok(b[i]), j).unwrap();
            assert!((e - mb[j]).norm() < 1e-12);
        }
        let id = SparseMatrix::identity(32);
        let pid =
            assemble_preconditioner(&id, &SparsityPattern::build(&id, 0).unwrap(), Side::Left)
                .unwrap();
        assert_eq!(
            preconditioned_rhs_element(&pid, |i| Ok(b[i]), 5).unwrap(),
            b[5]
        );
        assert!(preconditioned_rhs_element(&pid, |i| Ok(b[i]), 32).is_err());
    }

    #[test]
    fn query_count_bounded_by_support() {
        let a = diagonally_dominant(64, 3, 1.5, 8);
        let p = assemble_preconditioner(&a, &SparsityPattern::build(&a, 1).unwrap(), Side::Left)
            .unwrap();
        let counted = CountingOracle::new(&a);
        for k in 0..64 {
            counted.reset();
            preconditioned_row_oracle(&counted, &p, k).unwrap();
            assert_eq!(counted.calls() as usize, p.matrix().row(k).0.len());
        }
    }

    #[test]
    fn eps_monotone_in_level() {
        let a = diagonally_dominant(60, 4, 1.1, 21);
        let eps: Vec<f64> = (0..=2)
            .map(|l| {
                assemble_preconditioner(&a, &SparsityPattern::build(&a, l).unwrap(), Side::Left)
                    .unwrap()
                    .eps_pre()
            })
            .collect();
        assert!(
            eps[2] <= eps[1] + 1e-14 && eps[1] <= eps[0] + 1e-14,
            "{eps:?}"
        );
    }

    #[test]
    fn export_import_round_trip() {
        let a = diagonally_dominant(12, 2, 2.0, 2);
        let p = assemble_preconditioner(&a, &SparsityPattern::build(&a, 1).unwrap(), Side::Right)
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.mtx");
        p.export(&path).unwrap();
        let q = Preconditioner::import(&path).unwrap();
        assert_eq!(q.matrix(), p.matrix());
        assert_eq!(q.side(), Side::Right);
        assert_eq!(q.level(), Some(1));
        assert_eq!(q.eps_pre(), p.eps_pre());
    }

    #[test]
    fn spai_reduces_condition_of_dominant_matrix() {
        let a = diagonally_dominant(48, 3, 1.5, 4);
        let p = assemble_preconditioner(&a, &SparsityPattern::build(&a, 1).unwrap(), Side::Left)
            .unwrap();
        let k0 = condition_number(&a).unwrap().kappa;
        let k1 = condition_number(&p.apply_to(&a)).unwrap().kappa;
        assert!(k1 < k0);
        let _ = DenseVector::zeros(1);
    }
}
