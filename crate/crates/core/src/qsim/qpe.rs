use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::qsim::state::{register_value, ry_from_sin, signed_value};
use crate::qsim::{Evolution, RegisterLayout, StateVector};

/// How the spectrum of `H` sits on the clock grid `2 pi l / t0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpeDiagnostics {
    /// `lambda t0 / (2 pi)` for every eigenvalue.
    pub grid_positions: Vec<f64>,
    /// Some eigenvalue falls outside the signed range `[-T/2, T/2)` and wraps.
    pub aliased: bool,
    /// Largest distance of a grid position from the nearest integer.
    pub max_off_grid: f64,
}

impl QpeDiagnostics {
    pub fn new(spectrum: &[f64], t0: f64, layout: &RegisterLayout) -> Self {
        let half = (layout.clock_dim() / 2) as f64;
        let grid_positions: Vec<f64> = spectrum.iter().map(|l| l * t0 / (2.0 * PI)).collect();
        let aliased = grid_positions
            .iter()
            .any(|&x| x >= half - 0.5 || x < -half - 0.5);
        let max_off_grid = grid_positions
            .iter()
            .map(|x| (x - x.round()).abs())
            .fold(0.0, f64::max);
        QpeDiagnostics {
            grid_positions,
            aliased,
            max_off_grid,
        }
    }

    pub fn on_grid(&self, tol: f64) -> bool {
        !self.aliased && self.max_off_grid <= tol
    }
}

/// Eigenvalue represented by clock value `l`: `2 pi l / t0`, `l` read in two's complement.
pub fn grid_eigenvalue(l: usize, layout: &RegisterLayout, t0: f64) -> f64 {
    2.0 * PI * signed_value(l, layout.clock_qubits) as f64 / t0
}

/// Hadamards on the clock, controlled `U^{2^m}` with `U = e^{iH t0 / T}` on
/// clock qubit `m`, inverse QFT on the clock.
pub fn phase_estimation(
    ev: &Evolution,
    layout: &RegisterLayout,
    t0: f64,
    state: &mut StateVector,
) -> Result<QpeDiagnostics> {
    layout.check_system_dim(ev.dim())?;
    if !(t0 > 0.0) {
        return Err(contract("t0 must be positive"));
    }
    let (lo, t) = (layout.clock(), layout.clock_qubits);
    let dt = t0 / layout.clock_dim() as f64;
    for m in 0..t {
        state.hadamard(lo + m);
    }
    for m in 0..t {
        ev.apply(state, dt * (1u64 << m) as f64, Some(lo + m))?;
    }
    state.iqft(lo, t);
    Ok(QpeDiagnostics::new(ev.spectrum(), t0, layout))
}

/// Exact inverse of [`phase_estimation`].
pub fn inverse_phase_estimation(
    ev: &Evolution,
    layout: &RegisterLayout,
    t0: f64,
    state: &mut StateVector,
) -> Result<()> {
    layout.check_system_dim(ev.dim())?;
    let (lo, t) = (layout.clock(), layout.clock_qubits);
    let dt = t0 / layout.clock_dim() as f64;
    state.qft(lo, t);
    for m in (0..t).rev() {
        ev.apply(state, -dt * (1u64 << m) as f64, Some(lo + m))?;
    }
    for m in 0..t {
        state.hadamard(lo + m);
    }
    Ok(())
}

/// Rotates `a_x` so that `|0> -> sqrt(1 - (C/l~)^2)|0> + (C/l~)|1>` for clock
/// eigenvalue `l~`; clock value 0 leaves `a_x` untouched.
pub fn eigenvalue_inversion(
    layout: &RegisterLayout,
    t0: f64,
    c: f64,
    state: &mut StateVector,
) -> Result<()> {
    let min = 2.0 * PI / t0;
    if !(c > 0.0) || c > min * (1.0 + 1e-12) {
        return Err(contract(format!(
            "inversion constant C = {c} must lie in (0, {min}]"
        )));
    }
    let (lo, t, ax) = (layout.clock(), layout.clock_qubits, layout.a_x());
    let gates: Vec<_> = (0..layout.clock_dim())
        .map(|l| {
            if l == 0 {
                None
            } else {
                Some(ry_from_sin(
                    (c / grid_eigenvalue(l, layout, t0)).clamp(-1.0, 1.0),
                ))
            }
        })
        .collect();
    let bit = 1usize << ax;
    let amps = state.amplitudes_mut();
    for i in 0..amps.len() {
        if i & bit != 0 {
            continue;
        }
        if let Some(g) = &gates[register_value(i, lo, t)] {
            let (a0, a1) = (amps[i], amps[i | bit]);
            amps[i] = g[0][0] * a0 + g[0][1] * a1;
            amps[i | bit] = g[1][0] * a0 + g[1][1] * a1;
        }
    }
    Ok(())
}

/// Probability of clock outcome `l` for a phase `x = lambda t0 / (2 pi)`:
/// `sin^2(pi (x - l)) / (T^2 sin^2(pi (x - l) / T))`.
pub fn clock_profile(x: f64, l: usize, clock_dim: usize) -> f64 {
    let t = clock_dim as f64;
    let d = x - l as f64;
    let den = (PI * d / t).sin();
    if den.abs() < 1e-300 {
        return 1.0;
    }
    let num = (PI * d).sin();
    (num * num) / (t * t * den * den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SparseMatrix;
    use crate::C64;

    fn diag(vals: &[f64]) -> SparseMatrix {
        SparseMatrix::from_diagonal(&vals.iter().map(|&v| C64::new(v, 0.0)).collect::<Vec<_>>())
    }

    #[test]
    fn exact_grid_eigenvalue_reads_deterministically() {
        let t0 = 3.0;
        let lam = 2.0 * PI * 5.0 / t0;
        let layout = RegisterLayout::new(1, 4).unwrap();
        let ev = Evolution::exact(&diag(&[lam, 0.0])).unwrap();
        let mut s = StateVector::zero(layout.solver_qubits());
        let d = phase_estimation(&ev, &layout, t0, &mut s).unwrap();
        assert!(!d.aliased);
        let p = s.register_distribution(layout.clock(), 4);
        assert!((p[5] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_hamiltonian_keeps_clock_zero() {
        let layout = RegisterLayout::new(1, 3).unwrap();
        let ev = Evolution::exact(&diag(&[0.0, 0.0])).unwrap();
        let mut s = StateVector::zero(layout.solver_qubits());
        phase_estimation(&ev, &layout, 1.0, &mut s).unwrap();
        assert!((s.register_distribution(layout.clock(), 3)[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn negative_eigenvalue_uses_twos_complement() {
        let t0 = 2.0 * PI;
        let layout = RegisterLayout::new(1, 3).unwrap();
        let ev = Evolution::exact(&diag(&[-2.0, 1.0])).unwrap();
        let mut s = StateVector::zero(layout.solver_qubits());
        phase_estimation(&ev, &layout, t0, &mut s).unwrap();
        let p = s.register_distribution(layout.clock(), 3);
        assert!((p[6] - 1.0).abs() < 1e-12);
        assert_eq!(grid_eigenvalue(6, &layout, t0), -2.0);
    }

    #[test]
    fn off_grid_matches_dirichlet_profile() {
        let t0 = 2.0 * PI;
        for &x in &[2.3, -1.7, 0.45] {
            let layout = RegisterLayout::new(1, 5).unwrap();
            let ev = Evolution::exact(&diag(&[x, 0.0])).unwrap();
            let mut s = StateVector::zero(layout.solver_qubits());
            let d = phase_estimation(&ev, &layout, t0, &mut s).unwrap();
            assert!(d.max_off_grid > 0.2);
            let p = s.register_distribution(layout.clock(), 5);
            for (l, &pl) in p.iter().enumerate() {
                assert!((pl - clock_profile(x, l, 32)).abs() < 1e-8, "x {x} l {l}");
            }
        }
    }

    #[test]
    fn aliasing_is_flagged() {
        let layout = RegisterLayout::new(1, 3).unwrap();
        let d = QpeDiagnostics::new(&[4.0, 1.0], 2.0 * PI, &layout);
        assert!(d.aliased);
        let d = QpeDiagnostics::new(&[-4.0, 3.0], 2.0 * PI, &layout);
        assert!(!d.aliased && d.on_grid(1e-12));
    }

    #[test]
    fn inversion_amplitudes() {
        let t0 = 2.0 * PI;
        let layout = RegisterLayout::new(1, 3).unwrap();
        // clock = 1 (lambda = C) and clock = 2 (C / lambda = 1/2)
        for (l, want) in [(1usize, 1.0), (2, 0.25), (0, 0.0)] {
            let mut s = StateVector::basis(layout.solver_qubits(), l << layout.clock()).unwrap();
            eigenvalue_inversion(&layout, t0, 1.0, &mut s).unwrap();
            assert!((s.probability(|i| i >> layout.a_x() & 1 == 1) - want).abs() < 1e-14);
            assert!((s.norm() - 1.0).abs() < 1e-14);
        }
        let mut s = StateVector::zero(layout.solver_qubits());
        assert!(eigenvalue_inversion(&layout, t0, 1.5, &mut s).is_err());
    }

    #[test]
    fn inverse_qpe_restores_state() {
        let t0 = 2.0;
        let layout = RegisterLayout::new(1, 4).unwrap();
        let h = SparseMatrix::from_triplets(
            2,
            [
                (0, 0, C64::new(0.3, 0.0)),
                (0, 1, C64::new(0.2, 0.1)),
                (1, 0, C64::new(0.2, -0.1)),
                (1, 1, C64::new(-1.1, 0.0)),
            ],
        )
        .unwrap();
        for ev in [
            Evolution::exact(&h).unwrap(),
            Evolution::trotter(&h, 2, 3).unwrap(),
        ] {
            let mut s = StateVector::basis(layout.solver_qubits(), 1).unwrap();
            phase_estimation(&ev, &layout, t0, &mut s).unwrap();
            inverse_phase_estimation(&ev, &layout, t0, &mut s).unwrap();
            assert!((s.amplitudes()[1].norm() - 1.0).abs() < 1e-12);
        }
    }
}
