use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{contract, Error, Result};
use crate::C64;

/// Dense statevector over `n_qubits`; qubit `q` is bit `q` of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

/// 2x2 single-qubit matrix, row-major.
pub type Gate1 = [[C64; 2]; 2];

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn hadamard_gate() -> Gate1 {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

/// Real rotation with `|0> -> c|0> + s|1>`, `c = sqrt(1 - s^2)`.
pub fn ry_from_sin(s: f64) -> Gate1 {
    let c = (1.0 - s * s).max(0.0).sqrt();
    [
        [C64::new(c, 0.0), C64::new(-s, 0.0)],
        [C64::new(s, 0.0), C64::new(c, 0.0)],
    ]
}

/// Value of the `width`-bit register starting at qubit `lo` in basis index `i`.
#[inline]
pub fn register_value(i: usize, lo: usize, width: usize) -> usize {
    (i >> lo) & ((1usize << width) - 1)
}

/// Two's-complement reading of a `width`-bit register value.
#[inline]
pub fn signed_value(v: usize, width: usize) -> i64 {
    if width > 0 && v >= 1 << (width - 1) {
        v as i64 - (1i64 << width)
    } else {
        v as i64
    }
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = ONE;
        StateVector { n_qubits, amps }
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if index >= 1 << n_qubits {
            return Err(Error::Index {
                index,
                dim: 1 << n_qubits,
            });
        }
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[index] = ONE;
        Ok(StateVector { n_qubits, amps })
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(contract(format!(
                "statevector length {len} is not a power of two"
            )));
        }
        Ok(StateVector {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probability(&self, pred: impl Fn(usize) -> bool) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| pred(*i))
            .map(|(_, z)| z.norm_sqr())
            .sum()
    }

    /// Marginal distribution of a register.
    pub fn register_distribution(&self, lo: usize, width: usize) -> Vec<f64> {
        let mut p = vec![0.0; 1 << width];
        for (i, z) in self.amps.iter().enumerate() {
            p[register_value(i, lo, width)] += z.norm_sqr();
        }
        p
    }

    /// `self ⊗ high`: `self` keeps the low qubits, `high` is placed above them.
    pub fn tensor(&self, high: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.len() * high.len());
        for h in &high.amps {
            amps.extend(self.amps.iter().map(|l| l * h));
        }
        StateVector {
            n_qubits: self.n_qubits + high.n_qubits,
            amps,
        }
    }

    fn check_qubit(&self, q: usize) {
        assert!(
            q < self.n_qubits,
            "qubit {q} out of range for {} qubits",
            self.n_qubits
        );
    }

    /// Applies `u` to qubit `q` on the subspace where every `(qubit, value)`
    /// control matches.
    pub fn apply_1q(&mut self, q: usize, u: &Gate1, controls: &[(usize, bool)]) {
        self.check_qubit(q);
        let (mut cmask, mut cval) = (0usize, 0usize);
        for &(c, v) in controls {
            self.check_qubit(c);
            assert_ne!(c, q, "control equals target");
            cmask |= 1 << c;
            if v {
                cval |= 1 << c;
            }
        }
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit != 0 || i & cmask != cval {
                continue;
            }
            let (a0, a1) = (self.amps[i], self.amps[i | bit]);
            self.amps[i] = u[0][0] * a0 + u[0][1] * a1;
            self.amps[i | bit] = u[1][0] * a0 + u[1][1] * a1;
        }
    }

    pub fn hadamard(&mut self, q: usize) {
        self.apply_1q(q, &hadamard_gate(), &[]);
    }

    /// `diag(1, e^{i theta})` on `target` controlled by `control`; symmetric in the two qubits.
    pub fn controlled_phase(&mut self, control: usize, target: usize, theta: f64) {
        self.check_qubit(control);
        self.check_qubit(target);
        let mask = (1usize << control) | (1usize << target);
        let ph = C64::from_polar(1.0, theta);
        for (i, z) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *z *= ph;
            }
        }
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        self.controlled_swap(None, a, b);
    }

    /// Exchanges qubits `a` and `b`, optionally controlled on `control = 1`.
    pub fn controlled_swap(&mut self, control: Option<usize>, a: usize, b: usize) {
        self.check_qubit(a);
        self.check_qubit(b);
        if a == b {
            return;
        }
        let (ba, bb) = (1usize << a, 1usize << b);
        let cm = control.map_or(0, |c| {
            self.check_qubit(c);
            1usize << c
        });
        for i in 0..self.amps.len() {
            if i & ba != 0 && i & bb == 0 && i & cm == cm {
                self.amps.swap(i, i ^ ba ^ bb);
            }
        }
    }

    /// Applies a `2^width x 2^width` matrix to the register `[lo, lo + width)`,
    /// optionally controlled on a qubit outside the register being `1`.
    pub fn apply_register(
        &mut self,
        lo: usize,
        width: usize,
        m: &DMatrix<C64>,
        control: Option<usize>,
    ) -> Result<()> {
        let dim = 1usize << width;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: m.nrows(),
            });
        }
        if lo + width > self.n_qubits {
            return Err(contract("register exceeds statevector"));
        }
        if let Some(c) = control {
            self.check_qubit(c);
            if c >= lo && c < lo + width {
                return Err(contract("control qubit lies inside the target register"));
            }
        }
        let rmask = (dim - 1) << lo;
        let cm = control.map_or(0, |c| 1usize << c);
        let mut buf = DVector::<C64>::zeros(dim);
        for base in 0..self.amps.len() {
            if base & rmask != 0 || base & cm != cm {
                continue;
            }
            for r in 0..dim {
                buf[r] = self.amps[base | (r << lo)];
            }
            let out = m * &buf;
            for r in 0..dim {
                self.amps[base | (r << lo)] = out[r];
            }
        }
        Ok(())
    }

    /// `|y> -> T^{-1/2} sum_tau e^{2 pi i y tau / T} |tau>` on `[lo, lo + width)`.
    pub fn qft(&mut self, lo: usize, width: usize) {
        for i in (0..width).rev() {
            self.hadamard(lo + i);
            for j in (0..i).rev() {
                self.controlled_phase(lo + j, lo + i, PI / (1u64 << (i - j)) as f64);
            }
        }
        for k in 0..width / 2 {
            self.swap(lo + k, lo + width - 1 - k);
        }
    }

    pub fn iqft(&mut self, lo: usize, width: usize) {
        for k in 0..width / 2 {
            self.swap(lo + k, lo + width - 1 - k);
        }
        for i in 0..width {
            for j in 0..i {
                self.controlled_phase(lo + j, lo + i, -PI / (1u64 << (i - j)) as f64);
            }
            self.hadamard(lo + i);
        }
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        assert_eq!(self.len(), other.len());
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}
