//! Matrix Market coordinate I/O and one-value-per-line vectors.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{DenseVector, SparseMatrix};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
    SkewSymmetric,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn parse_matrix_market(text: &str) -> Result<SparseMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let h: Vec<String> = header
        .split_whitespace()
        .map(|s| s.to_ascii_lowercase())
        .collect();
    if h.len() != 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" || h[2] != "coordinate" {
        return Err(perr(
            1,
            "expected '%%MatrixMarket matrix coordinate <field> <symmetry>'",
        ));
    }
    let field = match h[3].as_str() {
        "real" => Field::Real,
        "complex" => Field::Complex,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        f => return Err(perr(1, format!("unsupported field '{f}'"))),
    };
    let sym = match h[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "hermitian" => Symmetry::Hermitian,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        s => return Err(perr(1, format!("unsupported symmetry '{s}'"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    let mut read = 0usize;
    for (ln, line) in lines {
        let ln = ln + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let tok: Vec<&str> = t.split_whitespace().collect();
        if size.is_none() {
            if tok.len() != 3 {
                return Err(perr(ln, "expected 'rows cols nnz'"));
            }
            let p = |s: &str| s.parse::<usize>().map_err(|e| perr(ln, e.to_string()));
            let (r, c, nnz) = (p(tok[0])?, p(tok[1])?, p(tok[2])?);
            if r != c {
                return Err(perr(ln, "only square matrices are supported"));
            }
            size = Some((r, c, nnz));
            continue;
        }
        let (n, _, _) = size.unwrap();
        let need = match field {
            Field::Complex => 4,
            Field::Pattern => 2,
            _ => 3,
        };
        if tok.len() < need {
            return Err(perr(ln, format!("expected {need} fields")));
        }
        let idx = |s: &str| -> Result<usize> {
            let v = s.parse::<usize>().map_err(|e| perr(ln, e.to_string()))?;
            if v == 0 || v > n {
                return Err(perr(ln, format!("index {v} out of range 1..={n}")));
            }
            Ok(v - 1)
        };
        let f = |s: &str| s.parse::<f64>().map_err(|e| perr(ln, e.to_string()));
        let (i, j) = (idx(tok[0])?, idx(tok[1])?);
        let v = match field {
            Field::Complex => C64::new(f(tok[2])?, f(tok[3])?),
            Field::Pattern => C64::new(1.0, 0.0),
            _ => C64::new(f(tok[2])?, 0.0),
        };
        triplets.push((i, j, v));
        read += 1;
        if i != j {
            match sym {
                Symmetry::General => {}
                Symmetry::Symmetric => triplets.push((j, i, v)),
                Symmetry::Hermitian => triplets.push((j, i, v.conj())),
                Symmetry::SkewSymmetric => triplets.push((j, i, -v)),
            }
        }
    }
    let (n, _, nnz) = size.ok_or_else(|| perr(0, "missing size line"))?;
    if read != nnz {
        return Err(perr(0, format!("expected {nnz} entries, found {read}")));
    }
    SparseMatrix::from_triplets(n, triplets)
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    parse_matrix_market(&std::fs::read_to_string(path)?)
}

/// Writes `complex general`, or `complex hermitian` (lower triangle) when
/// the matrix is exactly Hermitian.
pub fn format_matrix_market(a: &SparseMatrix, comment: Option<&str>) -> String {
    let herm = a.is_hermitian();
    let mut s = String::new();
    let _ = writeln!(
        s,
        "%%MatrixMarket matrix coordinate complex {}",
        if herm { "hermitian" } else { "general" }
    );
    if let Some(c) = comment {
        for l in c.lines() {
            let _ = writeln!(s, "% {l}");
        }
    }
    let entries: Vec<_> = a.iter().filter(|&(i, j, _)| !herm || i >= j).collect();
    let _ = writeln!(s, "{} {} {}", a.dim(), a.dim(), entries.len());
    for (i, j, v) in entries {
        let _ = writeln!(s, "{} {} {:e} {:e}", i + 1, j + 1, v.re, v.im);
    }
    s
}

pub fn write_matrix_market(
    a: &SparseMatrix,
    path: impl AsRef<Path>,
    comment: Option<&str>,
) -> Result<()> {
    std::fs::write(path, format_matrix_market(a, comment))?;
    Ok(())
}

/// One value per line: `re` or `re im`. `#` and `%` start comments.
pub fn parse_vector(text: &str) -> Result<DenseVector> {
    let mut v = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with('%') {
            continue;
        }
        let tok: Vec<&str> = t.split_whitespace().collect();
        let f = |s: &str| s.parse::<f64>().map_err(|e| perr(ln + 1, e.to_string()));
        let z = match tok.as_slice() {
            [re] => C64::new(f(re)?, 0.0),
            [re, im] => C64::new(f(re)?, f(im)?),
            _ => return Err(perr(ln + 1, "expected 're' or 're im'")),
        };
        v.push(z);
    }
    Ok(DenseVector::from_vec(v))
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<DenseVector> {
    parse_vector(&std::fs::read_to_string(path)?)
}

pub fn format_vector(v: &DenseVector) -> String {
    let mut s = String::new();
    for z in v.iter() {
        let _ = writeln!(s, "{:e} {:e}", z.re, z.im);
    }
    s
}
