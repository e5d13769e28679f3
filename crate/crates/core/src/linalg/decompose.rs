use crate::error::{contract, Result};
use crate::linalg::SparseMatrix;
use crate::C64;

/// Hermitian matrix with at most one nonzero per row and column.
///
/// `partner[i] = Some((j, v))` stores entry `(i, j) = v`; for `j != i` the
/// mirrored slot holds `(i, conj(v))`, and for `j == i` the value is real.
#[derive(Debug, Clone, PartialEq)]
pub struct OneSparseTerm {
    partner: Vec<Option<(usize, C64)>>,
}

impl OneSparseTerm {
    pub fn new(partner: Vec<Option<(usize, C64)>>) -> Result<Self> {
        let n = partner.len();
        for (i, p) in partner.iter().enumerate() {
            if let Some((j, v)) = *p {
                if j >= n {
                    return Err(contract(format!("partner index {j} out of range")));
                }
                if j == i {
                    if v.im != 0.0 {
                        return Err(contract("diagonal entry of a Hermitian term must be real"));
                    }
                } else if partner[j] != Some((i, v.conj())) {
                    return Err(contract(format!("term not Hermitian at ({i}, {j})")));
                }
            }
        }
        Ok(OneSparseTerm { partner })
    }

    pub fn dim(&self) -> usize {
        self.partner.len()
    }

    pub fn partner(&self, i: usize) -> Option<(usize, C64)> {
        self.partner[i]
    }

    pub fn is_diagonal(&self) -> bool {
        self.partner
            .iter()
            .enumerate()
            .all(|(i, p)| p.is_none_or(|(j, _)| j == i))
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.partner
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|(j, v)| (i, j, v)))
    }

    pub fn to_sparse(&self) -> SparseMatrix {
        SparseMatrix::from_rows(
            self.partner
                .iter()
                .map(|p| p.iter().copied().collect())
                .collect(),
        )
    }
}

/// Splits a Hermitian matrix into 1-sparse Hermitian terms.
///
/// The diagonal becomes one term; off-diagonal pairs `(i, j), i < j` are
/// visited in row-major order and greedily assigned the smallest color free at
/// both endpoints. Each color class is a matching, hence 1-sparse. Greedy
/// coloring uses at most `2d - 1` colors, well under the `6 d^2` ceiling.
pub fn one_sparse_decomposition(h: &SparseMatrix) -> Result<Vec<OneSparseTerm>> {
    if !h.is_hermitian() {
        return Err(contract(
            "one-sparse decomposition requires a Hermitian matrix",
        ));
    }
    let n = h.dim();
    let mut terms: Vec<Vec<Option<(usize, C64)>>> = Vec::new();

    let mut diag = vec![None; n];
    let mut has_diag = false;
    for i in 0..n {
        let v = h.get(i, i);
        if v != C64::new(0.0, 0.0) {
            diag[i] = Some((i, v));
            has_diag = true;
        }
    }

    let mut used: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let (cols, vals) = h.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if j <= i {
                continue;
            }
            let color = (0..)
                .find(|c| !used[i].contains(c) && !used[j].contains(c))
                .unwrap();
            used[i].push(color);
            used[j].push(color);
            if color == terms.len() {
                terms.push(vec![None; n]);
            }
            terms[color][i] = Some((j, v));
            terms[color][j] = Some((i, v.conj()));
        }
    }

    let mut out = Vec::with_capacity(terms.len() + 1);
    if has_diag {
        out.push(OneSparseTerm { partner: diag });
    }
    out.extend(terms.into_iter().map(|partner| OneSparseTerm { partner }));
    Ok(out)
}
