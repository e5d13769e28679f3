//! Statevector simulation of the quantum linear-system pipeline.
//!
//! Stages: amplitude-encoded preparation of `b`, phase estimation of
//! `e^{iH t0 / T}` on a `t`-qubit clock, controlled rotation of `a_x` by
//! `C / lambda~`, and uncompute of the phase estimation. Readouts act on the
//! resulting unitary state: the swap test against an R-preparation, amplitude
//! estimation of ancilla probabilities, diagonal moments and single entries.
//!
//! Every stage is unitary; probabilities are read directly from amplitudes
//! and randomness enters only through seeded amplitude-estimation sampling.

mod evolution;
mod layout;
mod oracle;
mod pipeline;
pub mod qpe;
mod readout;
pub mod state;

pub use evolution::{
    evolve_exact, evolve_trotter, suzuki_exponential_bound, trotter_exponential_count, Backend,
    Evolution,
};
pub use layout::{RegisterLayout, DEFAULT_QUBIT_CAP};
pub use oracle::{prepare_entangled_state, prepare_r_state, VectorOracle};
pub use pipeline::{dilate_system, run_qlsa, undilate_solution, QlsaOutcome, QlsaParams};
pub use qpe::{eigenvalue_inversion, inverse_phase_estimation, phase_estimation, QpeDiagnostics};
pub use readout::{
    ae_distribution, ae_error_bound, amplitude_estimate, amplitude_estimate_probability,
    estimate_from_exact, estimate_pipeline_amplitudes, exact_pipeline_amplitudes, moment_estimate,
    moment_estimate_ae, solution_entry, swap_test, swap_test_full_state, AeEstimate, Amplitude,
    EntryEstimate, PipelineAmplitudes, SwapTestReadout, MAX_AE_BITS,
};
pub use state::StateVector;
