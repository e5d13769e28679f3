use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

/// Default upper bound on the total qubit count.
pub const DEFAULT_QUBIT_CAP: usize = 26;

/// Global qubit ordering, least significant first:
///
/// ```text
/// [system s] [clock t] a_b a_x [R-system s] a_r a_s
/// ```
///
/// The solver state occupies the first `s + t + 2` qubits and the
/// R-preparation (`R-system`, `a_r`) the next `s + 1`, so the swap-test state
/// is the tensor product of the two with `a_s` on top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    pub system_qubits: usize,
    pub clock_qubits: usize,
    pub cap: usize,
}

impl RegisterLayout {
    pub fn new(system_qubits: usize, clock_qubits: usize) -> Result<Self> {
        Self::with_cap(system_qubits, clock_qubits, DEFAULT_QUBIT_CAP)
    }

    pub fn with_cap(system_qubits: usize, clock_qubits: usize, cap: usize) -> Result<Self> {
        if clock_qubits == 0 {
            return Err(contract("clock register needs at least one qubit"));
        }
        let l = RegisterLayout {
            system_qubits,
            clock_qubits,
            cap,
        };
        if l.total_qubits() > cap {
            return Err(contract(format!(
                "layout needs {} qubits, cap is {cap}",
                l.total_qubits()
            )));
        }
        Ok(l)
    }

    /// Smallest system register holding dimension `n`.
    pub fn for_dimension(n: usize, clock_qubits: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(contract(format!(
                "system dimension {n} must be a power of two"
            )));
        }
        Self::new(n.trailing_zeros() as usize, clock_qubits)
    }

    pub fn system_dim(&self) -> usize {
        1 << self.system_qubits
    }

    /// `T = 2^t`.
    pub fn clock_dim(&self) -> usize {
        1 << self.clock_qubits
    }

    pub fn system(&self) -> usize {
        0
    }

    pub fn clock(&self) -> usize {
        self.system_qubits
    }

    pub fn a_b(&self) -> usize {
        self.system_qubits + self.clock_qubits
    }

    pub fn a_x(&self) -> usize {
        self.a_b() + 1
    }

    /// Qubits in the solver state (system, clock, `a_b`, `a_x`).
    pub fn solver_qubits(&self) -> usize {
        self.a_x() + 1
    }

    pub fn r_system(&self) -> usize {
        self.solver_qubits()
    }

    pub fn a_r(&self) -> usize {
        self.r_system() + self.system_qubits
    }

    pub fn a_s(&self) -> usize {
        self.a_r() + 1
    }

    pub fn total_qubits(&self) -> usize {
        self.a_s() + 1
    }

    pub fn check_system_dim(&self, n: usize) -> Result<()> {
        if n != self.system_dim() {
            return Err(Error::Dimension {
                expected: self.system_dim(),
                got: n,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registers_are_disjoint_and_ordered() {
        let l = RegisterLayout::new(3, 5).unwrap();
        assert_eq!((l.system(), l.clock(), l.a_b(), l.a_x()), (0, 3, 8, 9));
        assert_eq!((l.r_system(), l.a_r(), l.a_s()), (10, 13, 14));
        assert_eq!(l.total_qubits(), 15);
        assert_eq!(l.clock_dim(), 32);
    }

    #[test]
    fn cap_enforced() {
        assert!(RegisterLayout::new(6, 12).is_err());
        assert!(RegisterLayout::with_cap(6, 12, 30).is_ok());
        assert!(RegisterLayout::for_dimension(6, 4).is_err());
        assert_eq!(
            RegisterLayout::for_dimension(16, 4).unwrap().system_qubits,
            4
        );
    }
}
