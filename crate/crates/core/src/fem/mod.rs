//! Scalar Helmholtz finite elements for perfectly conducting scatterers.
//!
//! Linear elements on 1-D segments and 2-D triangles assemble
//! `F = K - k^2 M + B` with an absorbing term `B` on the outer boundary.
//! The PEC condition is eliminated into the right-hand side and the far
//! field is a linear functional `R.x` of the nodal scattered field.

mod assemble;
pub mod bessel;
mod mesh;
mod problem;
pub mod quadrature;
mod reference;

pub use assemble::{
    assemble_operator, assemble_system, classical_rcs, dirichlet_data, far_field_parts,
    far_field_vector, incident_rhs, quantum_rcs, segment_matrices, spectral_surrogate,
    triangle_gradients, triangle_matrices, AssembledSystem, FarFieldParts, SpectralSurrogate,
    SystemSummary,
};
pub use mesh::{BoundaryFacet, BoundaryTag, Mesh};
pub use problem::{AbsorbingBoundary, CrossSection, Geometry, ScatteringProblem};
pub use reference::{
    circle_series, circle_series_partial, reference_solution, ReferenceSolution, SERIES_RTOL,
};
