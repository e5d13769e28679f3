//! Sparse and dense complex linear algebra used as the classical baseline
//! and as verification oracles for the quantum pipeline.

mod cg;
mod decompose;
mod dense;
pub mod generate;
pub mod mmio;
mod sparse;

pub use cg::{cg_solve, CgMethod, CgOutcome};
pub use decompose::{one_sparse_decomposition, OneSparseTerm};
pub use dense::{
    banded_solve, condition_number, condition_number_dense, dense_solve, dense_solve_matrix,
    singular_values, ConditionReport, Eigensystem, DENSE_CAP, SINGULAR_RTOL,
};
pub use sparse::{collect_oracle, hermitian_dilation, CountingOracle, RowOracle, SparseMatrix};

pub type DenseVector = nalgebra::DVector<crate::C64>;

/// Largest entry modulus of a dense complex matrix.
pub fn max_abs(m: &nalgebra::DMatrix<crate::C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
