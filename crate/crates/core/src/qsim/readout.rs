use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::linalg::generate::rng;
use crate::linalg::SparseMatrix;
use crate::qsim::state::{hadamard_gate, register_value, ry_from_sin};
use crate::qsim::{
    phase_estimation, prepare_r_state, run_qlsa, Evolution, QlsaOutcome, QlsaParams,
    RegisterLayout, StateVector, VectorOracle,
};
use crate::C64;

/// Largest number of amplitude-estimation bits.
pub const MAX_AE_BITS: u32 = 20;

/// A readout probability with an optional estimation error bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Amplitude {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<f64>,
}

impl Amplitude {
    pub fn exact(value: f64) -> Self {
        Amplitude { value, error: None }
    }

    fn err(&self) -> f64 {
        self.error.unwrap_or(0.0)
    }
}

/// Ancilla readouts of the swap-test pipeline. Bit strings list the
/// ancillas in the order `(a_b, a_x, a_r, a_s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineAmplitudes {
    pub sin2_phi_b: Amplitude,
    pub sin2_phi_x: Amplitude,
    pub sin2_phi_r: Amplitude,
    pub p_1110: Amplitude,
    pub p_1111: Amplitude,
}

impl PipelineAmplitudes {
    /// `P_1110 - P_1111`.
    pub fn difference(&self) -> Amplitude {
        let value = self.p_1110.value - self.p_1111.value;
        let error = match (self.p_1110.error, self.p_1111.error) {
            (None, None) => None,
            _ => Some(self.p_1110.err() + self.p_1111.err()),
        };
        Amplitude { value, error }
    }

    /// `|<R|x>|^2 = (P_1110 - P_1111) / (sin^2 phi_b sin^2 phi_x sin^2 phi_r)`.
    pub fn overlap(&self) -> Result<Amplitude> {
        let den = self.sin2_phi_b.value * self.sin2_phi_x.value * self.sin2_phi_r.value;
        if !(den > 0.0) {
            return Err(Error::Degenerate("zero ancilla success amplitude".into()));
        }
        let d = self.difference();
        let value = d.value / den;
        let error = d.error.map(|e| {
            let rel = [self.sin2_phi_b, self.sin2_phi_x, self.sin2_phi_r]
                .iter()
                .map(|a| a.err() / a.value)
                .sum::<f64>();
            e / den + value.abs() * rel
        });
        Ok(Amplitude { value, error })
    }
}

/// Exact swap-test probabilities over the four ancillas, indexed by
/// `a_b + 2 a_x + 4 a_r + 8 a_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapTestReadout {
    pub probabilities: [f64; 16],
    pub sin2_phi_r: f64,
}

impl SwapTestReadout {
    pub fn p(&self, a_b: bool, a_x: bool, a_r: bool, a_s: bool) -> f64 {
        self.probabilities
            [a_b as usize | (a_x as usize) << 1 | (a_r as usize) << 2 | (a_s as usize) << 3]
    }

    pub fn p_1110(&self) -> f64 {
        self.p(true, true, true, false)
    }

    pub fn p_1111(&self) -> f64 {
        self.p(true, true, true, true)
    }
}

/// Hadamard on `a_s`, swap of the solver and R system registers controlled
/// on `a_s`, Hadamard on `a_s`.
///
/// The swap test never touches the clock, so it is run on each clock slice of
/// the solver state tensored with the R-preparation and the slice
/// probabilities are summed; this equals running it on the full product state.
pub fn swap_test(outcome: &QlsaOutcome, r: &VectorOracle) -> Result<SwapTestReadout> {
    let l = &outcome.layout;
    l.check_system_dim(r.dim())?;
    let s = l.system_qubits;
    let rstate = prepare_r_state(r, l)?;
    // Compact ordering: [sys s] a_b a_x [R-sys s] a_r a_s
    let (ab, ax, rsys, ar, as_) = (s, s + 1, s + 2, 2 * s + 2, 2 * s + 3);
    let mut probabilities = [0.0; 16];
    let src = outcome.state.amplitudes();
    for c in 0..l.clock_dim() {
        let mut slice = vec![C64::new(0.0, 0.0); 1 << (s + 2)];
        for (k, z) in slice.iter_mut().enumerate() {
            let sys = k & ((1 << s) - 1);
            let flags = k >> s;
            let g = sys | (c << l.clock()) | ((flags & 1) << l.a_b()) | ((flags >> 1) << l.a_x());
            *z = src[g];
        }
        if slice.iter().all(|z| z.norm_sqr() == 0.0) {
            continue;
        }
        let mut st = StateVector::from_amplitudes(slice)?
            .tensor(&rstate)
            .tensor(&StateVector::zero(1));
        apply_swap_test(&mut st, s, 0, rsys, as_);
        for (i, z) in st.amplitudes().iter().enumerate() {
            let key = (i >> ab & 1) | (i >> ax & 1) << 1 | (i >> ar & 1) << 2 | (i >> as_ & 1) << 3;
            probabilities[key] += z.norm_sqr();
        }
    }
    Ok(SwapTestReadout {
        probabilities,
        sin2_phi_r: r.sin2_phi(),
    })
}

fn apply_swap_test(st: &mut StateVector, width: usize, x_lo: usize, r_lo: usize, anc: usize) {
    st.hadamard(anc);
    for k in 0..width {
        st.controlled_swap(Some(anc), x_lo + k, r_lo + k);
    }
    st.apply_1q(anc, &hadamard_gate(), &[]);
}

/// Swap test applied to the full product state in the global layout.
/// Quadratic in memory; used to cross-check [`swap_test`].
pub fn swap_test_full_state(outcome: &QlsaOutcome, r: &VectorOracle) -> Result<SwapTestReadout> {
    let l = &outcome.layout;
    let mut st = outcome
        .state
        .tensor(&prepare_r_state(r, l)?)
        .tensor(&StateVector::zero(1));
    apply_swap_test(&mut st, l.system_qubits, l.system(), l.r_system(), l.a_s());
    let mut probabilities = [0.0; 16];
    for (i, z) in st.amplitudes().iter().enumerate() {
        let key = (i >> l.a_b() & 1)
            | (i >> l.a_x() & 1) << 1
            | (i >> l.a_r() & 1) << 2
            | (i >> l.a_s() & 1) << 3;
        probabilities[key] += z.norm_sqr();
    }
    Ok(SwapTestReadout {
        probabilities,
        sin2_phi_r: r.sin2_phi(),
    })
}

/// Exact readouts taken directly from the simulator state.
pub fn exact_pipeline_amplitudes(
    outcome: &QlsaOutcome,
    r: &VectorOracle,
) -> Result<PipelineAmplitudes> {
    let sw = swap_test(outcome, r)?;
    Ok(PipelineAmplitudes {
        sin2_phi_b: Amplitude::exact(outcome.sin2_phi_b),
        sin2_phi_x: Amplitude::exact(outcome.sin2_phi_x),
        sin2_phi_r: Amplitude::exact(sw.sin2_phi_r),
        p_1110: Amplitude::exact(sw.p_1110()),
        p_1111: Amplitude::exact(sw.p_1111()),
    })
}

/// One amplitude-estimation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AeEstimate {
    /// `sin^2(pi y / 2^bits)`.
    pub estimate: f64,
    /// Error bound evaluated at the estimate.
    pub bound: f64,
    pub y: usize,
    pub bits: u32,
}

impl AeEstimate {
    pub fn amplitude(&self) -> Amplitude {
        Amplitude {
            value: self.estimate,
            error: Some(self.bound),
        }
    }
}

/// `2 pi sqrt(a (1 - a)) / M + pi^2 / M^2` with `M = 2^bits`.
pub fn ae_error_bound(a: f64, bits: u32) -> f64 {
    let m = (1u64 << bits) as f64;
    2.0 * PI * (a * (1.0 - a)).max(0.0).sqrt() / m + PI * PI / (m * m)
}

fn check_bits(bits: u32) -> Result<()> {
    if !(1..=MAX_AE_BITS).contains(&bits) {
        return Err(contract(format!(
            "amplitude estimation bits must be in 1..={MAX_AE_BITS}, got {bits}"
        )));
    }
    Ok(())
}

/// Distribution of the phase-estimation outcome `y` in amplitude estimation
/// of a good-subspace probability `a`.
///
/// The Grover iterate `Q = -U S_0 U^H S_chi` leaves the plane spanned by the
/// good and bad parts of `U|0>` invariant and acts on it as a rotation by
/// `2 theta`, `sin^2 theta = a`. Phase estimation of that rotation on a
/// one-qubit system register therefore reproduces the full-dimension
/// measurement distribution exactly.
pub fn ae_distribution(a: f64, bits: u32) -> Result<Vec<f64>> {
    check_bits(bits)?;
    if !(0.0..=1.0).contains(&a) {
        return Err(contract(format!("probability {a} outside [0, 1]")));
    }
    let theta = a.sqrt().asin();
    // Rotation by 2 theta = exp(i H) with H = -2 theta sigma_y.
    let h = SparseMatrix::from_triplets(
        2,
        [
            (0, 1, C64::new(0.0, 2.0 * theta)),
            (1, 0, C64::new(0.0, -2.0 * theta)),
        ],
    )?;
    let ev = Evolution::exact(&h)?;
    let layout = RegisterLayout::with_cap(1, bits as usize, MAX_AE_BITS as usize + 8)?;
    let mut st = StateVector::zero(1 + bits as usize);
    let amps = st.amplitudes_mut();
    amps[0] = C64::new(theta.cos(), 0.0);
    amps[1] = C64::new(theta.sin(), 0.0);
    // t0 = T makes the per-bit evolution time exactly 2^m.
    phase_estimation(&ev, &layout, layout.clock_dim() as f64, &mut st)?;
    Ok(st.register_distribution(1, bits as usize))
}

/// Samples one amplitude-estimation outcome for a known good-subspace probability.
pub fn amplitude_estimate_probability(a: f64, bits: u32, seed: u64) -> Result<AeEstimate> {
    let dist = ae_distribution(a, bits)?;
    let u: f64 = rng(seed).gen();
    let mut acc = 0.0;
    let mut y = dist.len() - 1;
    for (k, p) in dist.iter().enumerate() {
        acc += p;
        if u < acc {
            y = k;
            break;
        }
    }
    let m = dist.len() as f64;
    let estimate = (PI * y as f64 / m).sin().powi(2);
    Ok(AeEstimate {
        estimate,
        bound: ae_error_bound(estimate, bits),
        y,
        bits,
    })
}

/// Amplitude estimation of the probability that `state` (the output of a
/// deterministic pipeline unitary applied to `|0>`) lies in the
/// computational-basis subspace selected by `good`.
pub fn amplitude_estimate(
    state: &StateVector,
    good: impl Fn(usize) -> bool,
    bits: u32,
    seed: u64,
) -> Result<AeEstimate> {
    amplitude_estimate_probability(state.probability(good).clamp(0.0, 1.0), bits, seed)
}

fn ratio(num: AeEstimate, den: AeEstimate) -> Result<Amplitude> {
    if den.estimate == 0.0 {
        return Err(Error::Degenerate(
            "estimated denominator probability is zero".into(),
        ));
    }
    let value = num.estimate / den.estimate;
    let rel = if num.estimate > 0.0 {
        num.bound / num.estimate
    } else {
        0.0
    } + den.bound / den.estimate;
    let error = if num.estimate > 0.0 {
        value * rel
    } else {
        num.bound / den.estimate
    };
    Ok(Amplitude {
        value,
        error: Some(error),
    })
}

/// Exact readouts plus independent amplitude estimates of `sin^2 phi_b`,
/// `P(a_b a_x = 11)`, `sin^2 phi_r`, `P_1110` and `P_1111`, with
/// `sin^2 phi_x` formed as `P(11) / sin^2 phi_b`.
///
/// Seeds `seed, seed + 1, ..., seed + 4` drive the five estimates.
pub fn estimate_pipeline_amplitudes(
    h: &SparseMatrix,
    b: &VectorOracle,
    r: &VectorOracle,
    params: &QlsaParams,
    layout: &RegisterLayout,
    bits: u32,
    seed: u64,
) -> Result<(PipelineAmplitudes, PipelineAmplitudes)> {
    check_bits(bits)?;
    let out = run_qlsa(h, b, params, layout)?;
    let exact = exact_pipeline_amplitudes(&out, r)?;
    Ok((exact, estimate_from_exact(&exact, bits, seed)?))
}

/// AE stage of [`estimate_pipeline_amplitudes`] for already computed exact readouts.
pub fn estimate_from_exact(
    exact: &PipelineAmplitudes,
    bits: u32,
    seed: u64,
) -> Result<PipelineAmplitudes> {
    let p11 = exact.sin2_phi_b.value * exact.sin2_phi_x.value;
    let ae = |a: f64, k: u64| {
        amplitude_estimate_probability(a.clamp(0.0, 1.0), bits, seed.wrapping_add(k))
    };
    let eb = ae(exact.sin2_phi_b.value, 0)?;
    let e11 = ae(p11, 1)?;
    let er = ae(exact.sin2_phi_r.value, 2)?;
    let e0 = ae(exact.p_1110.value, 3)?;
    let e1 = ae(exact.p_1111.value, 4)?;
    Ok(PipelineAmplitudes {
        sin2_phi_b: eb.amplitude(),
        sin2_phi_x: ratio(e11, eb)?,
        sin2_phi_r: er.amplitude(),
        p_1110: e0.amplitude(),
        p_1111: e1.amplitude(),
    })
}

fn check_observable(f: &[f64], n: usize) -> Result<()> {
    if f.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: f.len(),
        });
    }
    if let Some((j, v)) = f
        .iter()
        .enumerate()
        .find(|(_, v)| !(0.0..=1.0).contains(*v))
    {
        return Err(contract(format!(
            "observable value f_{j} = {v} outside [0, 1]"
        )));
    }
    Ok(())
}

/// Appends an ancilla `a_m` rotated to amplitude `f_j^{n/2}` controlled on the
/// system value `j`.
fn moment_state(outcome: &QlsaOutcome, f: &[f64], n: u32) -> Result<(StateVector, usize)> {
    let l = &outcome.layout;
    check_observable(f, l.system_dim())?;
    let mut st = outcome.state.tensor(&StateVector::zero(1));
    let am = l.solver_qubits();
    let gates: Vec<_> = f
        .iter()
        .map(|&fj| ry_from_sin(if n == 0 { 1.0 } else { fj.powf(n as f64 / 2.0) }))
        .collect();
    let bit = 1usize << am;
    let s = l.system_qubits;
    let amps = st.amplitudes_mut();
    for i in 0..bit {
        let g = &gates[register_value(i, 0, s)];
        let (a0, a1) = (amps[i], amps[i | bit]);
        amps[i] = g[0][0] * a0 + g[0][1] * a1;
        amps[i | bit] = g[1][0] * a0 + g[1][1] * a1;
    }
    Ok((st, am))
}

/// `<x|D^n|x>` for `D = diag(f_j)` as `P(a_b a_x a_m = 111) / P(a_b a_x = 11)`.
pub fn moment_estimate(outcome: &QlsaOutcome, f: &[f64], n: u32) -> Result<f64> {
    let (st, am) = moment_state(outcome, f, n)?;
    let l = &outcome.layout;
    let flags = (1usize << l.a_b()) | (1usize << l.a_x());
    let num = st.probability(|i| i & flags == flags && i >> am & 1 == 1);
    let den = st.probability(|i| i & flags == flags);
    Ok(num / den)
}

/// AE version of [`moment_estimate`]; seeds `seed` and `seed + 1`.
pub fn moment_estimate_ae(
    outcome: &QlsaOutcome,
    f: &[f64],
    n: u32,
    bits: u32,
    seed: u64,
) -> Result<Amplitude> {
    let (st, am) = moment_state(outcome, f, n)?;
    let l = &outcome.layout;
    let flags = (1usize << l.a_b()) | (1usize << l.a_x());
    let num = amplitude_estimate(&st, |i| i & flags == flags && i >> am & 1 == 1, bits, seed)?;
    let den = amplitude_estimate(&st, |i| i & flags == flags, bits, seed.wrapping_add(1))?;
    ratio(num, den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntryEstimate {
    /// Estimated `|x_j|^2` for the normalized solution.
    pub estimate: Amplitude,
    /// Exact simulator value of the same ratio.
    pub exact: f64,
}

/// `|<j|x>|^2` from amplitude estimation of `|j><j| (x) |1><1|_{a_b} (x) |1><1|_{a_x}`
/// divided by an estimate of `sin^2 phi_b sin^2 phi_x`.
#[allow(clippy::too_many_arguments)]
pub fn solution_entry(
    h: &SparseMatrix,
    b: &VectorOracle,
    params: &QlsaParams,
    layout: &RegisterLayout,
    j: usize,
    bits: u32,
    seed: u64,
) -> Result<EntryEstimate> {
    if j >= layout.system_dim() {
        return Err(Error::Index {
            index: j,
            dim: layout.system_dim(),
        });
    }
    check_bits(bits)?;
    let out = run_qlsa(h, b, params, layout)?;
    let flags = (1usize << layout.a_b()) | (1usize << layout.a_x());
    let s = layout.system_qubits;
    let sel = |i: usize| i & flags == flags && register_value(i, 0, s) == j;
    let all = |i: usize| i & flags == flags;
    let exact = out.state.probability(sel) / out.state.probability(all);
    let num = amplitude_estimate(&out.state, sel, bits, seed)?;
    let den = amplitude_estimate(&out.state, all, bits, seed.wrapping_add(1))?;
    Ok(EntryEstimate {
        estimate: ratio(num, den)?,
        exact,
    })
}
