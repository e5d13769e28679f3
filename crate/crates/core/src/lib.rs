//! Preconditioned quantum linear system solver on a classical statevector
//! simulator.
//!
//! The crate is split into four layers:
//!
//! * [`linalg`]: sparse row oracles, Hermitian dilation, 1-sparse
//!   decomposition, dense reference solvers and conjugate gradient.
//! * [`spai`]: sparse approximate inverse preconditioning built from
//!   independent local least-squares problems.
//! * [`qsim`]: the unitary pipeline (state preparation, phase estimation,
//!   eigenvalue inversion, uncompute) and its ancilla readouts (swap test,
//!   amplitude estimation, moments, single entries).
//! * [`fem`]: scalar Helmholtz finite elements for PEC scattering, the
//!   far-field functional, and closed-form reference cross sections.

pub mod error;
pub mod fem;
pub mod linalg;
pub mod qsim;
pub mod spai;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub use fem::{AssembledSystem, CrossSection, Mesh, ScatteringProblem};
pub use linalg::{
    ConditionReport, CountingOracle, DenseVector, OneSparseTerm, RowOracle, SparseMatrix,
};
pub use qsim::{PipelineAmplitudes, QlsaParams, RegisterLayout, StateVector, VectorOracle};
pub use spai::{Preconditioner, Side, SparsityPattern};
