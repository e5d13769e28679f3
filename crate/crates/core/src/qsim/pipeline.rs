use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::linalg::{hermitian_dilation, DenseVector, SparseMatrix};
use crate::qsim::qpe::{
    eigenvalue_inversion, inverse_phase_estimation, phase_estimation, QpeDiagnostics,
};
use crate::qsim::state::register_value;
use crate::qsim::{
    prepare_entangled_state, Backend, Evolution, RegisterLayout, StateVector, VectorOracle,
};
use crate::C64;

fn default_epsilon() -> f64 {
    1e-2
}

fn default_order() -> u8 {
    2
}

fn default_steps() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QlsaParams {
    /// Evolution-time scale; clock value `l` encodes eigenvalue `2 pi l / t0`.
    pub t0: f64,
    /// Inversion constant; defaults to the smallest grid eigenvalue `2 pi / t0`.
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default = "default_order")]
    pub trotter_order: u8,
    /// Product-formula steps per controlled evolution.
    #[serde(default = "default_steps")]
    pub trotter_steps: usize,
}

impl QlsaParams {
    pub fn exact(t0: f64) -> Self {
        QlsaParams {
            t0,
            c: None,
            epsilon: default_epsilon(),
            backend: Backend::Exact,
            trotter_order: default_order(),
            trotter_steps: default_steps(),
        }
    }

    pub fn trotter(t0: f64, order: u8, steps: usize) -> Self {
        QlsaParams {
            backend: Backend::Trotter,
            trotter_order: order,
            trotter_steps: steps,
            ..Self::exact(t0)
        }
    }

    /// `t0` that puts eigenvalue magnitude `lambda_min` on clock value 1.
    pub fn t0_for_min_eigenvalue(lambda_min: f64) -> f64 {
        2.0 * PI / lambda_min
    }

    pub fn grid_spacing(&self) -> f64 {
        2.0 * PI / self.t0
    }

    pub fn inversion_constant(&self) -> f64 {
        self.c.unwrap_or_else(|| self.grid_spacing())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(contract("t0 must be positive and finite"));
        }
        let c = self.inversion_constant();
        if !(c > 0.0) || c > self.grid_spacing() * (1.0 + 1e-12) {
            return Err(contract(format!(
                "C = {c} must lie in (0, 2 pi / t0 = {}]",
                self.grid_spacing()
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(contract("epsilon must be positive"));
        }
        if !(1..=2).contains(&self.trotter_order) {
            return Err(contract("trotter_order must be 1 or 2"));
        }
        if self.trotter_steps == 0 {
            return Err(contract("trotter_steps must be positive"));
        }
        Ok(())
    }

    pub fn evolution(&self, h: &SparseMatrix) -> Result<Evolution> {
        match self.backend {
            Backend::Exact => Evolution::exact(h),
            Backend::Trotter => Evolution::trotter(h, self.trotter_order, self.trotter_steps),
        }
    }
}

/// Result of the unitary solver pipeline; nothing has been measured.
#[derive(Debug, Clone)]
pub struct QlsaOutcome {
    pub state: StateVector,
    pub layout: RegisterLayout,
    pub t0: f64,
    pub c: f64,
    pub sin2_phi_b: f64,
    pub sin2_phi_x: f64,
    pub diagnostics: QpeDiagnostics,
    /// Total probability on nonzero clock values after uncompute.
    pub clock_leakage: f64,
    /// Term exponentials used by the product-formula backend.
    pub exponentials: u64,
    /// Largest deviation of the state norm from 1 observed after any stage.
    pub max_norm_error: f64,
}

impl QlsaOutcome {
    fn flags(&self) -> usize {
        (1 << self.layout.a_b()) | (1 << self.layout.a_x())
    }

    /// `(a_b, a_x) = (1, 1)` component, one system vector per clock value.
    pub fn solution_slices(&self) -> Vec<DenseVector> {
        let l = &self.layout;
        let n = l.system_dim();
        let f = self.flags();
        (0..l.clock_dim())
            .map(|c| {
                DenseVector::from_fn(n, |j, _| self.state.amplitudes()[f | (c << l.clock()) | j])
            })
            .collect()
    }

    /// Normalized clock-0 solution component.
    pub fn solution_state(&self) -> Result<DenseVector> {
        let v = self.solution_slices().swap_remove(0);
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::Degenerate(
                "no solution amplitude on clock value 0".into(),
            ));
        }
        Ok(v / C64::new(n, 0.0))
    }

    /// `<x|rho|x>` for `rho` the normalized system state of the `(1, 1)`
    /// component with the clock traced out; equals `|<x_sim|x>|^2` on-grid.
    pub fn fidelity(&self, x: &DenseVector) -> f64 {
        let xn = x / C64::new(x.norm(), 0.0);
        let slices = self.solution_slices();
        let total: f64 = slices.iter().map(|v| v.norm_squared()).sum();
        slices.iter().map(|v| xn.dotc(v).norm_sqr()).sum::<f64>() / total
    }
}

/// Prepare, phase-estimate, invert, uncompute.
///
/// `h` must be Hermitian; a general system is solved through
/// [`dilate_system`]. The `(a_b, a_x) = (1, 1)` component of the returned
/// state is `sin(phi_b) sin(phi_x) |x>`.
pub fn run_qlsa(
    h: &SparseMatrix,
    b: &VectorOracle,
    params: &QlsaParams,
    layout: &RegisterLayout,
) -> Result<QlsaOutcome> {
    params.validate()?;
    layout.check_system_dim(h.dim())?;
    layout.check_system_dim(b.dim())?;
    if !h.is_hermitian() {
        return Err(contract(
            "run_qlsa needs a Hermitian matrix; dilate general systems first",
        ));
    }
    let ev = params.evolution(h)?;
    let c = params.inversion_constant();
    let mut max_norm_error: f64 = 0.0;
    let mut track = |s: &StateVector| max_norm_error = max_norm_error.max((s.norm() - 1.0).abs());

    let mut state = prepare_entangled_state(b, layout)?;
    track(&state);
    let diagnostics = phase_estimation(&ev, layout, params.t0, &mut state)?;
    track(&state);
    eigenvalue_inversion(layout, params.t0, c, &mut state)?;
    track(&state);
    inverse_phase_estimation(&ev, layout, params.t0, &mut state)?;
    track(&state);

    let (ab, ax) = (1usize << layout.a_b(), 1usize << layout.a_x());
    let sin2_phi_b = state.probability(|i| i & ab != 0);
    let p11 = state.probability(|i| i & ab != 0 && i & ax != 0);
    if sin2_phi_b == 0.0 || p11 == 0.0 {
        return Err(Error::Degenerate(
            "solution component has zero amplitude".into(),
        ));
    }
    let clock_leakage =
        state.probability(|i| register_value(i, layout.clock(), layout.clock_qubits) != 0);
    Ok(QlsaOutcome {
        layout: *layout,
        t0: params.t0,
        c,
        sin2_phi_b,
        sin2_phi_x: p11 / sin2_phi_b,
        diagnostics,
        clock_leakage,
        exponentials: ev.exponentials(),
        max_norm_error,
        state,
    })
}

/// Hermitian dilation `[[0, A], [A^H, 0]]` with right-hand side `(b, 0)`,
/// whose solution is `(0, x)`.
pub fn dilate_system(a: &SparseMatrix, b: &DenseVector) -> Result<(SparseMatrix, DenseVector)> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: b.len(),
        });
    }
    let mut bb = DenseVector::zeros(2 * n);
    bb.rows_mut(0, n).copy_from(b);
    Ok((hermitian_dilation(a), bb))
}

/// Lower block of a dilated solution.
pub fn undilate_solution(y: &DenseVector) -> DenseVector {
    let n = y.len() / 2;
    y.rows(n, n).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense_solve;
    use crate::linalg::generate::{hermitian_part, random_dense, random_vector};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn identity_returns_b() {
        let b = random_vector(4, 1);
        let o = VectorOracle::from_vector(&b).unwrap();
        let layout = RegisterLayout::new(2, 3).unwrap();
        let out = run_qlsa(
            &SparseMatrix::identity(4),
            &o,
            &QlsaParams::exact(2.0 * PI),
            &layout,
        )
        .unwrap();
        assert!((out.fidelity(&b) - 1.0).abs() < 1e-10);
        assert!(out.clock_leakage < 1e-10);
        assert!((out.sin2_phi_x - 1.0).abs() < 1e-10);
    }

    #[test]
    fn diagonal_half_on_grid() {
        let h = SparseMatrix::from_diagonal(&[c(1.0), c(0.5)]);
        let b = DenseVector::from_element(2, c(1.0));
        let o = VectorOracle::from_vector(&b).unwrap();
        let layout = RegisterLayout::new(1, 3).unwrap();
        let params = QlsaParams::exact(QlsaParams::t0_for_min_eigenvalue(0.5));
        let out = run_qlsa(&h, &o, &params, &layout).unwrap();
        let x = out.solution_state().unwrap();
        let want = DenseVector::from_vec(vec![c(1.0 / 5f64.sqrt()), c(2.0 / 5f64.sqrt())]);
        assert!((x - want).norm() < 1e-10);
        assert!(out.max_norm_error < 1e-10);
    }

    #[test]
    fn random_hermitian_fine_clock() {
        let h = SparseMatrix::from_dense(&hermitian_part(&random_dense(8, 2)));
        let b = random_vector(8, 3);
        let x = dense_solve(&h, &b).unwrap();
        let o = VectorOracle::from_vector(&b).unwrap();
        let layout = RegisterLayout::new(3, 10).unwrap();
        let ev = Evolution::exact(&h).unwrap();
        let lmax = ev.spectrum().iter().map(|l| l.abs()).fold(0.0, f64::max);
        // Largest eigenvalue just inside the signed clock range.
        let t0 = 2.0 * PI * (layout.clock_dim() / 2 - 1) as f64 / lmax;
        let out = run_qlsa(&h, &o, &QlsaParams::exact(t0), &layout).unwrap();
        assert!(!out.diagnostics.aliased);
        assert!(out.fidelity(&x) >= 0.99, "{}", out.fidelity(&x));
    }

    #[test]
    fn dilation_solves_general_system() {
        let a = SparseMatrix::from_dense(&random_dense(2, 5));
        let b = random_vector(2, 6);
        let (h, bb) = dilate_system(&a, &b).unwrap();
        let y = dense_solve(&h, &bb).unwrap();
        let x = dense_solve(&a, &b).unwrap();
        assert!(y.rows(0, 2).norm() < 1e-12);
        assert!((undilate_solution(&y) - x).norm() < 1e-12);
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = QlsaParams::exact(1.0);
        p.c = Some(10.0);
        assert!(p.validate().is_err());
        assert!(QlsaParams::exact(-1.0).validate().is_err());
        assert!(QlsaParams::trotter(1.0, 3, 1).validate().is_err());
        let h = SparseMatrix::from_dense(&random_dense(2, 1));
        let o = VectorOracle::from_vector(&random_vector(2, 1)).unwrap();
        assert!(run_qlsa(
            &h,
            &o,
            &QlsaParams::exact(1.0),
            &RegisterLayout::new(1, 2).unwrap()
        )
        .is_err());
    }

    #[test]
    fn params_deny_unknown_fields() {
        let p: QlsaParams = serde_json::from_str(r#"{"t0": 2.0, "backend": "trotter"}"#).unwrap();
        assert_eq!(p.backend, Backend::Trotter);
        assert_eq!(p.trotter_order, 2);
        assert!(serde_json::from_str::<QlsaParams>(r#"{"t0": 2.0, "bogus": 1}"#).is_err());
    }
}
