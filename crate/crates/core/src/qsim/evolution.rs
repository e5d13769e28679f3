use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::linalg::{one_sparse_decomposition, Eigensystem, OneSparseTerm, SparseMatrix};
use crate::qsim::StateVector;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// `e^{iHt}` from a dense eigendecomposition.
    #[default]
    Exact,
    /// Product formula over a 1-sparse decomposition.
    Trotter,
}

/// Number of term exponentials in one product-formula evolution.
///
/// Order 1 applies every term once per step; order 2 is the symmetric
/// splitting `e^{h_1/2} ... e^{h_{m-1}/2} e^{h_m} e^{h_{m-1}/2} ... e^{h_1/2}` per step.
pub fn trotter_exponential_count(terms: usize, order: u8, steps: usize) -> u64 {
    let m = terms as u64;
    let r = steps as u64;
    match order {
        1 => m * r,
        _ => (2 * m).saturating_sub(1) * r,
    }
}

/// Suzuki-integrator estimate `2 m^2 tau exp(2 sqrt(ln 5 ln(m tau / eps)))` of the
/// number of exponentials needed for accuracy `eps` at scaled time `tau`.
pub fn suzuki_exponential_bound(terms: usize, tau: f64, eps: f64) -> f64 {
    let m = terms as f64;
    let l = (m * tau / eps).ln().max(0.0);
    2.0 * m * m * tau * (2.0 * (5f64.ln() * l).sqrt()).exp()
}

enum Kind {
    Exact(Eigensystem),
    Trotter {
        terms: Vec<OneSparseTerm>,
        order: u8,
        steps: usize,
    },
}

/// Hamiltonian evolution `e^{iHt}` on the system register (qubits `[0, s)`).
pub struct Evolution {
    kind: Kind,
    dim: usize,
    spectrum: Vec<f64>,
    exponentials: AtomicU64,
}

impl std::fmt::Debug for Evolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &self.kind {
            Kind::Exact(_) => "exact".to_string(),
            Kind::Trotter {
                terms,
                order,
                steps,
            } => format!(
                "trotter(order {order}, {steps} steps, {} terms)",
                terms.len()
            ),
        };
        f.debug_struct("Evolution")
            .field("dim", &self.dim)
            .field("kind", &kind)
            .finish()
    }
}

fn check_hermitian(h: &SparseMatrix) -> Result<()> {
    if !h.is_hermitian() {
        return Err(contract("evolution requires a Hermitian matrix"));
    }
    if !h.dim().is_power_of_two() {
        return Err(contract(format!(
            "dimension {} is not a power of two",
            h.dim()
        )));
    }
    Ok(())
}

impl Evolution {
    pub fn exact(h: &SparseMatrix) -> Result<Self> {
        check_hermitian(h)?;
        let eig = Eigensystem::new(&h.to_dense())?;
        let spectrum = eig.eigenvalues.clone();
        Ok(Evolution {
            kind: Kind::Exact(eig),
            dim: h.dim(),
            spectrum,
            exponentials: AtomicU64::new(0),
        })
    }

    pub fn trotter(h: &SparseMatrix, order: u8, steps: usize) -> Result<Self> {
        check_hermitian(h)?;
        Self::from_terms(one_sparse_decomposition(h)?, order, steps)
    }

    pub fn from_terms(terms: Vec<OneSparseTerm>, order: u8, steps: usize) -> Result<Self> {
        if !(1..=2).contains(&order) {
            return Err(contract(format!(
                "trotter order must be 1 or 2, got {order}"
            )));
        }
        if steps == 0 {
            return Err(contract("trotter steps must be positive"));
        }
        let dim = terms.first().map_or(0, OneSparseTerm::dim);
        if dim == 0 || !dim.is_power_of_two() || terms.iter().any(|t| t.dim() != dim) {
            return Err(contract("terms must share a power-of-two dimension"));
        }
        let mut sum = nalgebra::DMatrix::<C64>::zeros(dim, dim);
        for t in &terms {
            for (i, j, v) in t.entries() {
                sum[(i, j)] += v;
            }
        }
        let spectrum = Eigensystem::new(&sum)?.eigenvalues;
        Ok(Evolution {
            kind: Kind::Trotter {
                terms,
                order,
                steps,
            },
            dim,
            spectrum,
            exponentials: AtomicU64::new(0),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn backend(&self) -> Backend {
        match self.kind {
            Kind::Exact(_) => Backend::Exact,
            Kind::Trotter { .. } => Backend::Trotter,
        }
    }

    /// Eigenvalues of `H`, ascending.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn term_count(&self) -> usize {
        match &self.kind {
            Kind::Exact(_) => 0,
            Kind::Trotter { terms, .. } => terms.len(),
        }
    }

    /// Term exponentials applied so far.
    pub fn exponentials(&self) -> u64 {
        self.exponentials.load(Ordering::Relaxed)
    }

    pub fn reset_counter(&self) {
        self.exponentials.store(0, Ordering::Relaxed);
    }

    /// Exponentials per call of [`Evolution::apply`].
    pub fn exponentials_per_call(&self) -> u64 {
        match &self.kind {
            Kind::Exact(_) => 0,
            Kind::Trotter {
                terms,
                order,
                steps,
            } => trotter_exponential_count(terms.len(), *order, *steps),
        }
    }

    /// Applies `e^{iHt}` to the system register, controlled on `control = 1`.
    ///
    /// For the product formula a negative `time` applies the factors in
    /// reverse order, so `apply(-t)` exactly inverts `apply(t)`.
    pub fn apply(&self, state: &mut StateVector, time: f64, control: Option<usize>) -> Result<()> {
        let s = self.dim.trailing_zeros() as usize;
        if s > state.n_qubits() {
            return Err(Error::Dimension {
                expected: self.dim,
                got: state.len(),
            });
        }
        match &self.kind {
            Kind::Exact(eig) => {
                let u = eig.function(|l| C64::from_polar(1.0, l * time));
                state.apply_register(0, s, &u, control)
            }
            Kind::Trotter {
                terms,
                order,
                steps,
            } => {
                let dt = time / *steps as f64;
                let mut seq: Vec<(usize, f64)> = Vec::new();
                let m = terms.len();
                for _ in 0..*steps {
                    if *order == 1 {
                        seq.extend((0..m).map(|k| (k, dt)));
                    } else {
                        seq.extend((0..m - 1).map(|k| (k, dt / 2.0)));
                        seq.push((m - 1, dt));
                        seq.extend((0..m - 1).rev().map(|k| (k, dt / 2.0)));
                    }
                }
                if time < 0.0 {
                    seq.reverse();
                }
                for (k, theta) in seq {
                    apply_term(state, &terms[k], s, theta, control);
                    self.exponentials.fetch_add(1, Ordering::Relaxed);
                }
                Ok(())
            }
        }
    }
}

/// `e^{i theta h}` for a 1-sparse Hermitian `h` on qubits `[0, s)`.
fn apply_term(
    state: &mut StateVector,
    term: &OneSparseTerm,
    s: usize,
    theta: f64,
    control: Option<usize>,
) {
    let dim = 1usize << s;
    let cm = control.map_or(0, |c| 1usize << c);
    let amps = state.amplitudes_mut();
    let mut base = 0;
    while base < amps.len() {
        if base & cm == cm {
            for i in 0..dim {
                match term.partner(i) {
                    None => {}
                    Some((j, v)) if j == i => amps[base | i] *= C64::from_polar(1.0, theta * v.re),
                    Some((j, v)) if j > i => {
                        let r = v.norm();
                        let (c, sn) = ((r * theta).cos(), (r * theta).sin());
                        let u = v / r;
                        let (ai, aj) = (amps[base | i], amps[base | j]);
                        amps[base | i] = ai * c + C64::i() * sn * u * aj;
                        amps[base | j] = C64::i() * sn * u.conj() * ai + aj * c;
                    }
                    Some(_) => {}
                }
            }
        }
        base += dim;
    }
}

/// `e^{iHt}` on qubits `[0, log2 dim H)` via the dense eigendecomposition.
pub fn evolve_exact(
    h: &SparseMatrix,
    time: f64,
    state: &mut StateVector,
    control: Option<usize>,
) -> Result<()> {
    Evolution::exact(h)?.apply(state, time, control)
}

/// Product-formula `e^{iHt}` for `H = sum terms`; returns the exponentials used.
pub fn evolve_trotter(
    terms: &[OneSparseTerm],
    time: f64,
    order: u8,
    steps: usize,
    state: &mut StateVector,
    control: Option<usize>,
) -> Result<u64> {
    let ev = Evolution::from_terms(terms.to_vec(), order, steps)?;
    ev.apply(state, time, control)?;
    Ok(ev.exponentials())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::generate::{
        hermitian_part, random_dense, random_sparse_hermitian, random_vector,
    };

    fn state_from(v: &crate::linalg::DenseVector) -> StateVector {
        let v = v / C64::new(v.norm(), 0.0);
        StateVector::from_amplitudes(v.iter().copied().collect()).unwrap()
    }

    fn dist(a: &StateVector, b: &StateVector) -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let s0 = state_from(&random_vector(4, 1));
        let mut s = s0.clone();
        let z = SparseMatrix::from_rows(vec![Vec::new(); 4]);
        evolve_exact(&z, 3.0, &mut s, None).unwrap();
        assert!(dist(&s, &s0) < 1e-14);
    }

    #[test]
    fn identity_gives_global_phase() {
        let s0 = state_from(&random_vector(4, 2));
        let mut s = s0.clone();
        evolve_exact(&SparseMatrix::identity(4), 0.7, &mut s, None).unwrap();
        let ph = C64::from_polar(1.0, 0.7);
        for (a, b) in s.amplitudes().iter().zip(s0.amplitudes()) {
            assert!((a - b * ph).norm() < 1e-14);
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let a = SparseMatrix::from_dense(&random_dense(4, 3));
        assert!(Evolution::exact(&a).is_err());
    }

    #[test]
    fn commuting_terms_exact_for_any_steps() {
        let d: Vec<C64> = (0..8)
            .map(|i| C64::new(0.3 * i as f64 - 1.0, 0.0))
            .collect();
        let h = SparseMatrix::from_diagonal(&d);
        let s0 = state_from(&random_vector(8, 4));
        let mut se = s0.clone();
        evolve_exact(&h, 1.3, &mut se, None).unwrap();
        let terms = one_sparse_decomposition(&h).unwrap();
        for order in [1, 2] {
            let mut st = s0.clone();
            let n = evolve_trotter(&terms, 1.3, order, 1, &mut st, None).unwrap();
            assert_eq!(n, trotter_exponential_count(terms.len(), order, 1));
            assert!(dist(&se, &st) < 1e-13);
        }
    }

    #[test]
    fn single_offdiagonal_term_is_exact() {
        let h = SparseMatrix::from_triplets(
            2,
            [(0, 1, C64::new(0.4, 0.3)), (1, 0, C64::new(0.4, -0.3))],
        )
        .unwrap();
        let terms = one_sparse_decomposition(&h).unwrap();
        assert_eq!(terms.len(), 1);
        let s0 = state_from(&random_vector(2, 5));
        let (mut a, mut b) = (s0.clone(), s0.clone());
        evolve_exact(&h, 2.0, &mut a, None).unwrap();
        evolve_trotter(&terms, 2.0, 1, 1, &mut b, None).unwrap();
        assert!(dist(&a, &b) < 1e-14);
    }

    #[test]
    fn trotter_converges_to_exact_and_counts() {
        let h = random_sparse_hermitian(8, 4, 6);
        let ev = Evolution::trotter(&h, 2, 400).unwrap();
        let s0 = state_from(&random_vector(8, 7));
        let (mut a, mut b) = (s0.clone(), s0.clone());
        evolve_exact(&h, 1.0, &mut a, None).unwrap();
        ev.apply(&mut b, 1.0, None).unwrap();
        assert!(dist(&a, &b) < 1e-6);
        assert_eq!(ev.exponentials(), (2 * ev.term_count() as u64 - 1) * 400);
    }

    #[test]
    fn negative_time_inverts_product_formula() {
        let h = SparseMatrix::from_dense(&hermitian_part(&random_dense(4, 8)));
        let ev = Evolution::trotter(&h, 1, 3).unwrap();
        let s0 = state_from(&random_vector(4, 9));
        let mut s = s0.clone();
        ev.apply(&mut s, 0.9, None).unwrap();
        ev.apply(&mut s, -0.9, None).unwrap();
        assert!(dist(&s, &s0) < 1e-13);
    }

    #[test]
    fn controlled_evolution_respects_control() {
        let h = SparseMatrix::from_dense(&hermitian_part(&random_dense(2, 10)));
        for ev in [
            Evolution::exact(&h).unwrap(),
            Evolution::trotter(&h, 2, 2).unwrap(),
        ] {
            let mut s = StateVector::zero(2);
            ev.apply(&mut s, 1.0, Some(1)).unwrap();
            assert_eq!(s, StateVector::zero(2));
        }
    }

    #[test]
    fn suzuki_bound_grows_with_precision() {
        let a = suzuki_exponential_bound(3, 10.0, 1e-2);
        let b = suzuki_exponential_bound(3, 10.0, 1e-6);
        assert!(b > a && a >= 2.0 * 9.0 * 10.0);
    }
}
