use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{contract, Error, Result};
use crate::linalg::DenseVector;
use crate::qsim::{RegisterLayout, StateVector};
use crate::C64;

/// Entry oracle `j -> (b_j, phi_j)` for a vector `v_j = b_j e^{i phi_j}`.
///
/// Magnitudes are nonnegative and phases lie in `[0, 2 pi)`; a negative real
/// entry therefore has phase `pi`. `scale` is the constant `C_b` with
/// `C_b b_j <= 1`.
#[derive(Debug)]
pub struct VectorOracle {
    magnitudes: Vec<f64>,
    phases: Vec<f64>,
    scale: f64,
    calls: AtomicU64,
}

impl Clone for VectorOracle {
    fn clone(&self) -> Self {
        VectorOracle {
            magnitudes: self.magnitudes.clone(),
            phases: self.phases.clone(),
            scale: self.scale,
            calls: AtomicU64::new(0),
        }
    }
}

impl VectorOracle {
    /// Uses the largest admissible scale `1 / max_j b_j`.
    pub fn from_vector(v: &DenseVector) -> Result<Self> {
        let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return Err(contract("vector oracle needs a nonzero vector"));
        }
        Self::with_scale(v, 1.0 / max)
    }

    pub fn with_scale(v: &DenseVector, scale: f64) -> Result<Self> {
        let magnitudes: Vec<f64> = v.iter().map(|z| z.norm()).collect();
        let phases = v
            .iter()
            .map(|z| {
                if z.norm() == 0.0 {
                    0.0
                } else {
                    z.arg().rem_euclid(2.0 * PI)
                }
            })
            .collect();
        Self::from_parts(magnitudes, phases, scale)
    }

    pub fn from_parts(magnitudes: Vec<f64>, phases: Vec<f64>, scale: f64) -> Result<Self> {
        if magnitudes.len() != phases.len() {
            return Err(Error::Dimension {
                expected: magnitudes.len(),
                got: phases.len(),
            });
        }
        if !(scale > 0.0) {
            return Err(contract("oracle scale must be positive"));
        }
        for (j, (&b, &p)) in magnitudes.iter().zip(&phases).enumerate() {
            if !(b >= 0.0) {
                return Err(contract(format!("magnitude b_{j} = {b} is negative")));
            }
            if !(0.0..2.0 * PI).contains(&p) {
                return Err(contract(format!("phase phi_{j} = {p} outside [0, 2pi)")));
            }
            // One ulp of slack so that 1 / max b_j is always admissible.
            if scale * b > 1.0 + 4.0 * f64::EPSILON {
                return Err(contract(format!("C_b * b_{j} = {} exceeds 1", scale * b)));
            }
        }
        Ok(VectorOracle {
            magnitudes,
            phases,
            scale,
            calls: AtomicU64::new(0),
        })
    }

    pub fn dim(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn query(&self, j: usize) -> Result<(f64, f64)> {
        if j >= self.dim() {
            return Err(Error::Index {
                index: j,
                dim: self.dim(),
            });
        }
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok((self.magnitudes[j], self.phases[j]))
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset_calls(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }

    /// The encoded vector `b_j e^{i phi_j}`.
    pub fn vector(&self) -> DenseVector {
        DenseVector::from_iterator(
            self.dim(),
            self.magnitudes
                .iter()
                .zip(&self.phases)
                .map(|(&b, &p)| C64::from_polar(b, p)),
        )
    }

    /// `sin^2 phi = (C_b^2 / N) sum_j b_j^2`.
    pub fn sin2_phi(&self) -> f64 {
        self.scale * self.scale * self.magnitudes.iter().map(|b| b * b).sum::<f64>()
            / self.dim() as f64
    }
}

/// Writes `sum_j |j> (sqrt(1 - C_b^2 b_j^2)|0> + C_b b_j |1>) e^{i phi_j} / sqrt(N)`
/// into a zeroed state, with `|j>` on qubits `[0, s)` and the ancilla at `anc`.
fn prepare_into(
    oracle: &VectorOracle,
    n_qubits: usize,
    s: usize,
    anc: usize,
) -> Result<StateVector> {
    let n = oracle.dim();
    if n != 1 << s {
        return Err(Error::Dimension {
            expected: 1 << s,
            got: n,
        });
    }
    let mut st = StateVector::zero(n_qubits);
    let amps = st.amplitudes_mut();
    amps[0] = C64::new(0.0, 0.0);
    let norm = 1.0 / (n as f64).sqrt();
    for j in 0..n {
        let (b, phi) = oracle.query(j)?;
        let s1 = (oracle.scale() * b).min(1.0);
        let s0 = (1.0 - s1 * s1).max(0.0).sqrt();
        let ph = C64::from_polar(norm, phi);
        amps[j] = ph * s0;
        amps[j | (1 << anc)] = ph * s1;
    }
    Ok(st)
}

/// Initial solver state: prepared `b` on the system register with flag `a_b`,
/// clock and `a_x` in `|0>`.
pub fn prepare_entangled_state(
    oracle: &VectorOracle,
    layout: &RegisterLayout,
) -> Result<StateVector> {
    prepare_into(
        oracle,
        layout.solver_qubits(),
        layout.system_qubits,
        layout.a_b(),
    )
}

/// R-preparation on `s + 1` qubits: system register then `a_r`.
pub fn prepare_r_state(oracle: &VectorOracle, layout: &RegisterLayout) -> Result<StateVector> {
    prepare_into(
        oracle,
        layout.system_qubits + 1,
        layout.system_qubits,
        layout.system_qubits,
    )
}
