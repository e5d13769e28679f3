use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::fem::mesh::{BoundaryTag, Mesh};
use crate::fem::problem::{AbsorbingBoundary, CrossSection, Geometry, ScatteringProblem};
use crate::fem::quadrature::{gauss_legendre_unit, triangle_rule};
use crate::linalg::mmio::{format_vector, write_matrix_market};
use crate::linalg::{banded_solve, DenseVector, SparseMatrix};
use crate::qsim::{Amplitude, PipelineAmplitudes, VectorOracle};
use crate::C64;

const EDGE_POINTS: usize = 8;
const TRIANGLE_POINTS: usize = 6;

/// Stiffness and mass of a linear segment of length `h`.
pub fn segment_matrices(h: f64) -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
    let s = 1.0 / h;
    let m = h / 6.0;
    ([[s, -s], [-s, s]], [[2.0 * m, m], [m, 2.0 * m]])
}

/// Barycentric gradients and signed area of a triangle.
pub fn triangle_gradients(p: [[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let area = 0.5
        * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
        g[i] = [(a[1] - b[1]) / (2.0 * area), (b[0] - a[0]) / (2.0 * area)];
    }
    (g, area)
}

/// Stiffness and mass of a linear triangle.
pub fn triangle_matrices(p: [[f64; 2]; 3]) -> ([[f64; 3]; 3], [[f64; 3]; 3]) {
    let (g, area) = triangle_gradients(p);
    let mut k = [[0.0; 3]; 3];
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
            m[i][j] = area / 12.0 * if i == j { 2.0 } else { 1.0 };
        }
    }
    (k, m)
}

fn check_problem(mesh: &Mesh, problem: &ScatteringProblem) -> Result<()> {
    problem.validate()?;
    let want = match problem.geometry {
        Geometry::Slab { .. } => 1,
        _ => 2,
    };
    if mesh.dimension() != want {
        return Err(contract(format!(
            "{:?} geometry needs a {want}-D mesh",
            problem.geometry
        )));
    }
    if mesh.dimension() == 1 && problem.absorbing != AbsorbingBoundary::FirstOrder {
        return Err(contract(
            "curvature absorbing terms are only defined in 2-D",
        ));
    }
    Ok(())
}

/// `F = K - k^2 M + B`, with `B` the absorbing surface term on OUTER facets:
/// `ik` times the facet mass in the first-order case, `ik + 1/(2 rho)` with
/// the curvature correction, plus a tangential stiffness at second order.
/// No boundary condition is imposed on the scatterer.
pub fn assemble_operator(mesh: &Mesh, problem: &ScatteringProblem) -> Result<SparseMatrix> {
    check_problem(mesh, problem)?;
    let k = problem.wavenumber;
    let k2 = k * k;
    let nodes = mesh.nodes();
    let mut trip: Vec<(usize, usize, C64)> = Vec::with_capacity(9 * mesh.elements().len());
    for el in mesh.elements() {
        if mesh.dimension() == 1 {
            let (ks, ms) = segment_matrices(nodes[el[1]][0] - nodes[el[0]][0]);
            for a in 0..2 {
                for b in 0..2 {
                    trip.push((el[a], el[b], C64::new(ks[a][b] - k2 * ms[a][b], 0.0)));
                }
            }
        } else {
            let (ks, ms) = triangle_matrices([nodes[el[0]], nodes[el[1]], nodes[el[2]]]);
            for a in 0..3 {
                for b in 0..3 {
                    trip.push((el[a], el[b], C64::new(ks[a][b] - k2 * ms[a][b], 0.0)));
                }
            }
        }
    }
    for f in mesh.facets(BoundaryTag::Outer) {
        if mesh.dimension() == 1 {
            trip.push((f.nodes[0], f.nodes[0], C64::new(0.0, k)));
            continue;
        }
        let (i, j) = (f.nodes[0], f.nodes[1]);
        let (p, q) = (nodes[i], nodes[j]);
        let len = (q[0] - p[0]).hypot(q[1] - p[1]);
        let rho = match problem.geometry {
            Geometry::Circle { outer_radius, .. } => outer_radius,
            _ => (0.5 * (p[0] + q[0])).hypot(0.5 * (p[1] + q[1])),
        };
        // boundary term -int N dE/dn = alpha int N E + beta int N' E'
        let (alpha, beta) = match problem.absorbing {
            AbsorbingBoundary::FirstOrder => (C64::new(0.0, k), C64::new(0.0, 0.0)),
            AbsorbingBoundary::Curvature => (C64::new(0.5 / rho, k), C64::new(0.0, 0.0)),
            AbsorbingBoundary::SecondOrder => {
                let den = C64::new(2.0 / rho, 2.0 * k);
                (
                    -C64::new(2.0 * k2 - 0.75 / (rho * rho), -3.0 * k / rho) / den,
                    C64::new(1.0, 0.0) / den,
                )
            }
        };
        let (d, o) = (
            alpha * (len / 3.0) + beta / len,
            alpha * (len / 6.0) - beta / len,
        );
        trip.extend([(i, i, d), (j, j, d), (i, j, o), (j, i, o)]);
    }
    SparseMatrix::from_triplets(mesh.n_nodes(), trip)
}

/// Scatterer node mask, failing when the scatterer boundary is empty.
fn scatterer_nodes(mesh: &Mesh) -> Result<Vec<bool>> {
    let mask = mesh.tagged_nodes(BoundaryTag::Scatterer);
    if !mask.iter().any(|&m| m) {
        return Err(Error::Mesh("mesh has no SCATTERER boundary".into()));
    }
    Ok(mask)
}

/// Dirichlet data `g_j = -E_i(r_j)` on scatterer nodes, zero elsewhere.
pub fn dirichlet_data(mesh: &Mesh, problem: &ScatteringProblem) -> Result<DenseVector> {
    let mask = scatterer_nodes(mesh)?;
    Ok(DenseVector::from_iterator(
        mesh.n_nodes(),
        mesh.nodes().iter().zip(&mask).map(|(&p, &m)| {
            if m {
                -problem.incident_field(p)
            } else {
                C64::new(0.0, 0.0)
            }
        }),
    ))
}

fn lifted_rhs(operator: &SparseMatrix, mask: &[bool], g: &DenseVector) -> DenseVector {
    let fg = operator.mul_vec(g);
    DenseVector::from_iterator(
        g.len(),
        (0..g.len()).map(|i| if mask[i] { g[i] } else { -fg[i] }),
    )
}

/// Right-hand side with the PEC condition lifted: `b_j = g_j` on scatterer
/// nodes and `b_l = -sum_j F_lj g_j` elsewhere.
pub fn incident_rhs(mesh: &Mesh, problem: &ScatteringProblem) -> Result<DenseVector> {
    let mask = scatterer_nodes(mesh)?;
    let g = dirichlet_data(mesh, problem)?;
    Ok(lifted_rhs(&assemble_operator(mesh, problem)?, &mask, &g))
}

/// Replaces scatterer rows and columns by the identity.
fn eliminate(operator: &SparseMatrix, mask: &[bool]) -> SparseMatrix {
    let rows = (0..operator.dim())
        .map(|i| {
            if mask[i] {
                return vec![(i, C64::new(1.0, 0.0))];
            }
            let (c, v) = operator.row(i);
            c.iter()
                .zip(v)
                .filter(|(j, _)| !mask[**j])
                .map(|(&j, &v)| (j, v))
                .collect()
        })
        .collect();
    SparseMatrix::from_rows(rows)
}

/// Contour and volume contributions to the far-field vector.
#[derive(Debug, Clone)]
pub struct FarFieldParts {
    pub contour: DenseVector,
    pub volume: DenseVector,
}

impl FarFieldParts {
    pub fn total(&self) -> DenseVector {
        &self.contour + &self.volume
    }
}

/// Far-field vector split into its two pieces.
///
/// In 2-D, for the scattered field `E = sum x_j N_j`,
/// `R.x = int_S E ik (s.n) K dl + int_Omega [grad E . grad(chi K) - k^2 E chi K]`
/// with `K = e^{ik s.r}`, `n` the normal on the scatterer pointing into the
/// domain and `chi` the sum of the scatterer-node basis functions. The
/// volume term replaces `-int_S K dE/dn` by Green's identity, so only the
/// element layer touching the scatterer contributes. Then
/// `E(rho s) ~ (-i/4) sqrt(2/(pi k rho)) e^{-i(k rho - pi/4)} R.x`.
///
/// In 1-D the functional is the reflection coefficient: `R_j = e^{ik s x_j}`
/// on the OUTER node, so `R.x = E_s(L) e^{ikL}` for `s = +x`.
pub fn far_field_parts(mesh: &Mesh, problem: &ScatteringProblem) -> Result<FarFieldParts> {
    check_problem(mesh, problem)?;
    let n = mesh.n_nodes();
    let k = problem.wavenumber;
    let s = problem.observation_direction;
    let nodes = mesh.nodes();
    let kernel = |p: [f64; 2]| C64::from_polar(1.0, k * (s[0] * p[0] + s[1] * p[1]));
    let mut contour = DenseVector::zeros(n);
    let mut volume = DenseVector::zeros(n);
    if mesh.dimension() == 1 {
        for f in mesh.facets(BoundaryTag::Outer) {
            let j = f.nodes[0];
            contour[j] += kernel(nodes[j]);
        }
        return Ok(FarFieldParts { contour, volume });
    }
    let chi = scatterer_nodes(mesh)?;
    let owners = mesh.facet_owners();
    let edge_rule = gauss_legendre_unit(EDGE_POINTS);
    let ik = C64::new(0.0, k);
    for f in mesh.facets(BoundaryTag::Scatterer) {
        let (i, j) = (f.nodes[0], f.nodes[1]);
        let mut key = vec![i, j];
        key.sort_unstable();
        let el = &mesh.elements()[owners[&key]];
        let third = *el
            .iter()
            .find(|&&v| v != i && v != j)
            .expect("triangle has a third vertex");
        let (p, q, r) = (nodes[i], nodes[j], nodes[third]);
        let t = [q[0] - p[0], q[1] - p[1]];
        let len = t[0].hypot(t[1]);
        let mut nrm = [t[1] / len, -t[0] / len];
        if nrm[0] * (r[0] - p[0]) + nrm[1] * (r[1] - p[1]) < 0.0 {
            nrm = [-nrm[0], -nrm[1]];
        }
        let sn = s[0] * nrm[0] + s[1] * nrm[1];
        for &(u, w) in &edge_rule {
            let x = [p[0] + u * t[0], p[1] + u * t[1]];
            let v = ik * sn * kernel(x) * (w * len);
            contour[i] += v * (1.0 - u);
            contour[j] += v * u;
        }
    }
    let tri = triangle_rule(TRIANGLE_POINTS);
    for el in mesh.elements() {
        let cv: [f64; 3] = [0, 1, 2].map(|a| if chi[el[a]] { 1.0 } else { 0.0 });
        if cv.iter().all(|&c| c == 0.0) {
            continue;
        }
        let pts = [nodes[el[0]], nodes[el[1]], nodes[el[2]]];
        let (g, area) = triangle_gradients(pts);
        let gchi = [0, 1].map(|d| (0..3).map(|a| cv[a] * g[a][d]).sum::<f64>());
        for &(xi, w) in &tri {
            let lam = [1.0 - xi[0] - xi[1], xi[0], xi[1]];
            let x = [0, 1].map(|d| (0..3).map(|a| lam[a] * pts[a][d]).sum::<f64>());
            let kx = kernel(x);
            let chi_x: f64 = (0..3).map(|a| lam[a] * cv[a]).sum();
            // grad(chi K) = K (grad chi + ik chi s)
            let grad = [0, 1].map(|d| kx * (C64::new(gchi[d], 0.0) + ik * chi_x * s[d]));
            let wt = 2.0 * area * w;
            for a in 0..3 {
                let v = grad[0] * g[a][0] + grad[1] * g[a][1] - kx * (k * k * chi_x * lam[a]);
                volume[el[a]] += v * wt;
            }
        }
    }
    Ok(FarFieldParts { contour, volume })
}

pub fn far_field_vector(mesh: &Mesh, problem: &ScatteringProblem) -> Result<DenseVector> {
    Ok(far_field_parts(mesh, problem)?.total())
}

/// Discrete scattering system `F x = b` with its far-field functional.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    /// Operator with scatterer rows and columns eliminated.
    pub matrix: SparseMatrix,
    pub rhs: DenseVector,
    pub far_field: DenseVector,
    /// `1 / max |b_j|`.
    pub c_b: f64,
    /// `1 / max |R_j|`.
    pub c_r: f64,
    /// Scatterer (Dirichlet) flag per node; unknowns map one-to-one onto nodes.
    pub dirichlet: Vec<bool>,
    pub cross_section: CrossSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemSummary {
    pub dim: usize,
    pub nnz: usize,
    pub sparsity: usize,
    pub dirichlet_nodes: usize,
    pub c_b: f64,
    pub c_r: f64,
    pub cross_section: CrossSection,
    pub prefactor: f64,
}

fn inverse_max(v: &DenseVector) -> f64 {
    let m = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if m > 0.0 {
        1.0 / m
    } else {
        1.0
    }
}

/// Assembles the eliminated operator, lifted right-hand side and far-field vector.
pub fn assemble_system(mesh: &Mesh, problem: &ScatteringProblem) -> Result<AssembledSystem> {
    let operator = assemble_operator(mesh, problem)?;
    let mask = scatterer_nodes(mesh)?;
    let g = dirichlet_data(mesh, problem)?;
    let rhs = lifted_rhs(&operator, &mask, &g);
    let far_field = far_field_vector(mesh, problem)?;
    Ok(AssembledSystem {
        matrix: eliminate(&operator, &mask),
        c_b: inverse_max(&rhs),
        c_r: inverse_max(&far_field),
        rhs,
        far_field,
        dirichlet: mask,
        cross_section: problem.cross_section(),
    })
}

impl AssembledSystem {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Oracle for `b`; errors when `b = 0`.
    pub fn rhs_oracle(&self) -> Result<VectorOracle> {
        VectorOracle::with_scale(&self.rhs, self.c_b)
    }

    /// Oracle preparing `conj(R)`, so that the swap-test overlap is the
    /// bilinear `sum_j R_j x_j`.
    pub fn far_field_oracle(&self) -> Result<VectorOracle> {
        VectorOracle::with_scale(&self.far_field.map(|z| z.conj()), self.c_r)
    }

    /// Direct banded solve.
    pub fn solve(&self) -> Result<DenseVector> {
        banded_solve(&self.matrix, &self.rhs)
    }

    pub fn classical_rcs(&self, x: &DenseVector) -> Result<f64> {
        classical_rcs(&self.far_field, x, self.cross_section)
    }

    pub fn summary(&self) -> SystemSummary {
        SystemSummary {
            dim: self.dim(),
            nnz: self.matrix.nnz(),
            sparsity: self.matrix.sparsity(),
            dirichlet_nodes: self.dirichlet.iter().filter(|&&d| d).count(),
            c_b: self.c_b,
            c_r: self.c_r,
            cross_section: self.cross_section,
            prefactor: self.cross_section.prefactor(),
        }
    }

    /// Writes `<stem>.mtx`, `<stem>.rhs.txt` and `<stem>.far.txt`.
    pub fn export(&self, stem: impl AsRef<Path>) -> Result<()> {
        let stem = stem.as_ref();
        let with = |ext: &str| {
            let mut s = stem.as_os_str().to_owned();
            s.push(ext);
            std::path::PathBuf::from(s)
        };
        let comment = format!(
            "scattering operator, {} cross section",
            self.cross_section.label()
        );
        write_matrix_market(&self.matrix, with(".mtx"), Some(&comment))?;
        std::fs::write(with(".rhs.txt"), format_vector(&self.rhs))?;
        std::fs::write(with(".far.txt"), format_vector(&self.far_field))?;
        Ok(())
    }
}

/// Diagonal stand-in for an assembled system with the same singular vectors.
///
/// With `F = U S V^H`, the surrogate solves `diag(l) y = U^H b` where each
/// singular value is snapped to the integer clock value `l = round(s / s_min * l_min)`,
/// and the far-field functional becomes `V^T R` so that `R.x` maps to `(V^T R).y`.
/// On the clock grid `2 pi / t0 = 1` the QLSA pipeline is exact on it.
#[derive(Debug, Clone)]
pub struct SpectralSurrogate {
    pub matrix: SparseMatrix,
    pub rhs: DenseVector,
    pub far_field: DenseVector,
    pub cross_section: CrossSection,
    /// Unsnapped singular values of `F`, descending.
    pub singular_values: Vec<f64>,
}

impl SpectralSurrogate {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn solve(&self) -> DenseVector {
        DenseVector::from_fn(self.dim(), |i, _| self.rhs[i] / self.matrix.get(i, i))
    }

    pub fn classical_rcs(&self) -> Result<f64> {
        classical_rcs(&self.far_field, &self.solve(), self.cross_section)
    }
}

/// Builds the [`SpectralSurrogate`] of `sys`; errors when a snapped value
/// does not fit below `2^(clock_qubits - 1)`.
pub fn spectral_surrogate(
    sys: &AssembledSystem,
    lmin: u32,
    clock_qubits: usize,
) -> Result<SpectralSurrogate> {
    if lmin == 0 || clock_qubits == 0 {
        return Err(contract(
            "surrogate needs lmin >= 1 and at least one clock qubit",
        ));
    }
    crate::linalg::condition_number(&sys.matrix)?;
    let svd = sys.matrix.to_dense().svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Degenerate("svd did not converge".into())),
    };
    let smin = svd.singular_values.min();
    let top = (1u64 << (clock_qubits - 1)) as f64;
    let diag: Vec<C64> = svd
        .singular_values
        .iter()
        .map(|s| C64::new((s / smin * lmin as f64).round(), 0.0))
        .collect();
    if let Some(d) = diag.iter().find(|d| d.re >= top) {
        return Err(Error::Unsupported(format!(
            "snapped clock value {} exceeds the signed range of {clock_qubits} clock qubits",
            d.re
        )));
    }
    let mut singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    Ok(SpectralSurrogate {
        matrix: SparseMatrix::from_diagonal(&diag),
        rhs: u.adjoint() * &sys.rhs,
        // V^T = conj(V^H)
        far_field: vt.map(|z| z.conj()) * &sys.far_field,
        cross_section: sys.cross_section,
        singular_values,
    })
}

/// `prefactor * |sum_j R_j x_j|^2`, bilinear in `R` (no conjugate).
pub fn classical_rcs(r: &DenseVector, x: &DenseVector, cs: CrossSection) -> Result<f64> {
    if r.len() != x.len() {
        return Err(Error::Dimension {
            expected: r.len(),
            got: x.len(),
        });
    }
    let rx: C64 = r.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    Ok(cs.prefactor() * rx.norm_sqr())
}

/// Cross section recovered from swap-test ancilla probabilities.
///
/// With the b-oracle scaled by `C_b`, the R-oracle by `C_r`, inversion
/// constant `C` and `n` prepared amplitudes, the swap-test difference is
/// `P_1110 - P_1111 = C^2 C_b^2 C_r^2 |R.x|^2 / n^2`, hence
/// `sigma = prefactor * n^2 (P_1110 - P_1111) / (C_b^2 C_r^2 C^2)`.
pub fn quantum_rcs(
    amps: &PipelineAmplitudes,
    n: usize,
    c_b: f64,
    c_r: f64,
    c: f64,
    cs: CrossSection,
) -> Result<Amplitude> {
    if !(amps.sin2_phi_x.value > 0.0) {
        return Err(Error::Degenerate(
            "sin^2 phi_x = 0: inversion ancilla never succeeded".into(),
        ));
    }
    if !(c_b > 0.0 && c_r > 0.0 && c > 0.0) {
        return Err(contract("scale constants must be positive"));
    }
    let d = amps.difference();
    let scale = cs.prefactor() * (n as f64).powi(2) / (c_b * c_r * c).powi(2);
    Ok(Amplitude {
        value: scale * d.value,
        error: d.error.map(|e| scale * e),
    })
}
