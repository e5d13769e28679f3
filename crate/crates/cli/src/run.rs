//! Experiment drivers: each turns a validated config into result records.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;

use qlsa_core::fem::{
    assemble_system, quantum_rcs, reference_solution, spectral_surrogate, CrossSection,
};
use qlsa_core::linalg::generate::{diagonally_dominant, hermitian_with_spectrum, random_vector};
use qlsa_core::linalg::mmio::{read_matrix_market, read_vector};
use qlsa_core::linalg::{
    cg_solve, collect_oracle, condition_number, dense_solve, CgOutcome, CountingOracle, DENSE_CAP,
};
use qlsa_core::qsim::{
    amplitude_estimate_probability, dilate_system, estimate_from_exact, exact_pipeline_amplitudes,
    run_qlsa, Amplitude, Backend, PipelineAmplitudes,
};
use qlsa_core::spai::{
    assemble_preconditioner, bound_check, preconditioned_rhs_element, preconditioned_row_oracle,
    PreconditionedOracle,
};
use qlsa_core::{
    AssembledSystem, DenseVector, Mesh, Preconditioner, QlsaParams, RegisterLayout,
    ScatteringProblem, SparseMatrix, SparsityPattern, VectorOracle, C64,
};

use crate::config::{
    Experiment, QlsaConfig, QuantumPath, RunConfig, SpaiConfig, SystemSource, T0Policy,
    VectorSource,
};
use crate::error::{invalid, CliError};
use crate::record::{
    ConditioningRecord, QlsaRecord, RcsRecord, ResultRecord, SolveRecord, SweepPoint,
};

type Result<T> = std::result::Result<T, CliError>;

/// Validates `cfg` for `experiment` and runs it. Sweeps return one record per
/// point in config order; other experiments return one record.
pub fn execute(
    experiment: Experiment,
    cfg: &RunConfig,
    verbose: bool,
) -> Result<Vec<ResultRecord>> {
    cfg.validate(experiment)?;
    let name = cfg.name_or(experiment.name());
    match experiment {
        Experiment::Sweep => sweep(cfg, &name, verbose),
        e => Ok(vec![single(e, cfg, &name, verbose)?]),
    }
}

fn single(
    experiment: Experiment,
    cfg: &RunConfig,
    name: &str,
    verbose: bool,
) -> Result<ResultRecord> {
    let start = Instant::now();
    if verbose {
        eprintln!("[{}] {name}: seed {}", experiment.name(), cfg.seed);
    }
    let mut rec = match experiment {
        Experiment::Solve => cmd_solve(cfg, name)?,
        Experiment::Spai => cmd_spai(cfg, name)?,
        Experiment::Qlsa => cmd_qlsa(cfg, name)?,
        Experiment::Rcs => cmd_rcs(cfg, name)?,
        Experiment::Sweep => return Err(invalid("nested sweep")),
    };
    rec.wall_time_s = start.elapsed().as_secs_f64();
    if verbose {
        eprintln!(
            "[{}] {name}: done in {:.3} s",
            experiment.name(),
            rec.wall_time_s
        );
    }
    Ok(rec)
}

fn sweep(cfg: &RunConfig, name: &str, verbose: bool) -> Result<Vec<ResultRecord>> {
    let sw = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| invalid("missing [sweep]"))?;
    let points = sw
        .values
        .iter()
        .map(|&v| Ok((v, cfg.point(sw.parameter, v)?)))
        .collect::<Result<Vec<_>>>()?;
    let run = |(v, p): &(u64, RunConfig)| {
        let mut rec = single(sw.run, p, name, verbose)?;
        rec.point = Some(SweepPoint {
            parameter: sw.parameter.name().to_string(),
            value: *v,
        });
        Ok(rec)
    };
    // indexed parallel collect keeps config order whatever the completion order
    let results: Vec<Result<ResultRecord>> = match sw.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| invalid(e.to_string()))?
            .install(|| points.par_iter().map(run).collect()),
        None => points.par_iter().map(run).collect(),
    };
    results.into_iter().collect()
}

struct FemData {
    system: AssembledSystem,
    problem: ScatteringProblem,
}

struct Materialized {
    a: SparseMatrix,
    b: DenseVector,
    fem: Option<FemData>,
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn vector(src: &VectorSource, n: usize, seed: u64) -> Result<DenseVector> {
    match src {
        VectorSource::Random => Ok(random_vector(n, seed)),
        VectorSource::Ones => Ok(DenseVector::from_element(n, c(1.0))),
        VectorSource::Basis { index } => {
            if *index >= n {
                return Err(invalid(format!(
                    "basis index {index} out of range for dimension {n}"
                )));
            }
            Ok(DenseVector::from_fn(n, |i, _| {
                c(if i == *index { 1.0 } else { 0.0 })
            }))
        }
        VectorSource::File { path } => {
            let v = read_vector(path)?;
            if v.len() != n {
                return Err(invalid(format!(
                    "{}: length {} != system dimension {n}",
                    path.display(),
                    v.len()
                )));
            }
            Ok(v)
        }
    }
}

fn materialize(cfg: &RunConfig) -> Result<Materialized> {
    let fem = |mesh: Mesh, problem: ScatteringProblem| -> Result<Materialized> {
        let system = assemble_system(&mesh, &problem)?;
        Ok(Materialized {
            a: system.matrix.clone(),
            b: system.rhs.clone(),
            fem: Some(FemData { system, problem }),
        })
    };
    let a = match &cfg.system {
        SystemSource::Identity { n } => SparseMatrix::identity(*n),
        SystemSource::Laplacian { n } => SparseMatrix::tridiagonal(*n, c(-1.0), c(2.0), c(-1.0)),
        SystemSource::DiagonallyDominant { n, offdiag, ratio } => {
            diagonally_dominant(*n, *offdiag, *ratio, cfg.seed)
        }
        SystemSource::Spectrum { eigenvalues } => {
            SparseMatrix::from_dense(&hermitian_with_spectrum(eigenvalues, cfg.seed))
        }
        SystemSource::MatrixMarket { path } => read_matrix_market(path)?,
        SystemSource::FemSlab {
            wavenumber,
            length,
            nodes,
        } => {
            return fem(
                Mesh::slab(*length, *nodes)?,
                ScatteringProblem::slab(*wavenumber, *length),
            )
        }
        SystemSource::FemCircle {
            wavenumber,
            radius,
            outer_radius,
            rings,
            sectors,
            absorbing,
        } => {
            return fem(
                Mesh::annulus(*radius, *outer_radius, *rings, *sectors)?,
                ScatteringProblem::circle(*wavenumber, *radius, *outer_radius)
                    .with_absorbing(*absorbing),
            )
        }
        SystemSource::FemMesh { path, problem } => return fem(Mesh::read(path)?, *problem),
    };
    let b = vector(
        cfg.rhs.as_ref().unwrap_or(&VectorSource::Random),
        a.dim(),
        cfg.seed.wrapping_add(1),
    )?;
    Ok(Materialized { a, b, fem: None })
}

fn build_preconditioner(a: &SparseMatrix, s: &SpaiConfig) -> Result<Preconditioner> {
    Ok(assemble_preconditioner(
        a,
        &SparsityPattern::build(a, s.level)?,
        s.side,
    )?)
}

fn solve_record(out: &CgOutcome, dense: Option<&DenseVector>) -> SolveRecord {
    SolveRecord {
        method: format!("{:?}", out.method).to_lowercase(),
        iterations: out.iterations,
        converged: out.converged,
        relative_residual: out.relative_residual,
        dense_error: dense.map(|x| (&out.x - x).norm() / x.norm().max(f64::MIN_POSITIVE)),
    }
}

fn kappa(a: &SparseMatrix) -> Result<Option<f64>> {
    if a.dim() > DENSE_CAP {
        return Ok(None);
    }
    Ok(Some(condition_number(a)?.kappa))
}

fn conditioning(a: &SparseMatrix, m: Option<&Preconditioner>) -> Result<ConditioningRecord> {
    let mut rec = ConditioningRecord {
        kappa: kappa(a)?,
        kappa_preconditioned: None,
        level: None,
        side: None,
        eps_pre: None,
        d: None,
        bound_radius: None,
        bound: None,
        bound_holds: None,
    };
    if let Some(m) = m {
        let check = bound_check(m, a.sparsity());
        rec.kappa_preconditioned = kappa(&m.apply_to(a))?;
        rec.level = m.level();
        rec.side = Some(m.side());
        rec.eps_pre = Some(m.eps_pre());
        rec.d = Some(a.sparsity());
        rec.bound_radius = Some(check.radius);
        rec.bound = check.bound;
        rec.bound_holds = match (check.bound, rec.kappa_preconditioned) {
            (Some(b), Some(k)) => Some(k <= b * (1.0 + 1e-12)),
            _ => None,
        };
    }
    Ok(rec)
}

pub fn cmd_solve(cfg: &RunConfig, name: &str) -> Result<ResultRecord> {
    let m = materialize(cfg)?;
    let n = m.a.dim();
    let mut rec = ResultRecord::new("solve", name, cfg.seed, n, m.a.nnz());
    let max_iter = cfg.solver.max_iter.unwrap_or(50 * n);
    let dense = if n <= DENSE_CAP {
        Some(dense_solve(&m.a, &m.b)?)
    } else {
        None
    };
    let plain = cg_solve(&m.a, &m.b, cfg.solver.tol, max_iter, None)?;
    rec.solve = Some(solve_record(&plain, dense.as_ref()));
    let mut failures = Vec::new();
    if !plain.converged {
        failures.push(format!(
            "cg did not converge in {} iterations",
            plain.iterations
        ));
    }
    let precond = cfg
        .spai
        .as_ref()
        .map(|s| build_preconditioner(&m.a, s))
        .transpose()?;
    if let Some(p) = &precond {
        let pre = cg_solve(&m.a, &m.b, cfg.solver.tol, max_iter, Some(p))?;
        rec.preconditioned_solve = Some(solve_record(&pre, dense.as_ref()));
        if !pre.converged {
            failures.push(format!(
                "preconditioned cg did not converge in {} iterations",
                pre.iterations
            ));
        }
    }
    rec.conditioning = Some(conditioning(&m.a, precond.as_ref())?);
    rec.failure = (!failures.is_empty()).then(|| failures.join("; "));
    Ok(rec)
}

pub fn cmd_spai(cfg: &RunConfig, name: &str) -> Result<ResultRecord> {
    let spai = cfg.spai.as_ref().ok_or_else(|| invalid("missing [spai]"))?;
    let m = materialize(cfg)?;
    let mut rec = ResultRecord::new("spai", name, cfg.seed, m.a.dim(), m.a.nnz());
    let p = build_preconditioner(&m.a, spai)?;
    let counter = CountingOracle::new(&m.a);
    let mut per_row = 0;
    for k in 0..m.a.dim() {
        let before = counter.calls();
        preconditioned_row_oracle(&counter, &p, k)?;
        per_row = per_row.max(counter.calls() - before);
    }
    rec.counters.a_oracle_calls = counter.calls();
    rec.counters.a_oracle_calls_per_row = per_row;
    rec.conditioning = Some(conditioning(&m.a, Some(&p))?);
    Ok(rec)
}

/// The Hermitian system handed to the simulator.
struct Prepared {
    h: SparseMatrix,
    b: DenseVector,
    /// Swap-test reference state, already conjugated where a bilinear readout is wanted.
    r: DenseVector,
    dilated: bool,
    padded: bool,
    /// Smallest `|lambda|` of the unpadded Hamiltonian.
    lambda_min: f64,
}

/// Dilates non-Hermitian systems (solution in the lower block) and pads to a
/// power of two with `lambda_min` on the diagonal; the padding block carries
/// no amplitude of `b` and is invariant under the evolution.
fn prepare(a: &SparseMatrix, b: &DenseVector, r: &DenseVector) -> Result<Prepared> {
    let (h, b, r, dilated) = if a.is_hermitian() {
        (a.clone(), b.clone(), r.clone(), false)
    } else {
        let (h, bd) = dilate_system(a, b)?;
        let n = a.dim();
        let rd = DenseVector::from_fn(2 * n, |i, _| if i < n { c(0.0) } else { r[i - n] });
        (h, bd, rd, true)
    };
    let lambda_min = condition_number(&h)?.sigma_min;
    let n = h.dim();
    let np = n.next_power_of_two();
    if np == n {
        return Ok(Prepared {
            h,
            b,
            r,
            dilated,
            padded: false,
            lambda_min,
        });
    }
    let mut rows: Vec<Vec<(usize, C64)>> = (0..n)
        .map(|i| {
            let (cols, vals) = h.row(i);
            cols.iter().copied().zip(vals.iter().copied()).collect()
        })
        .collect();
    rows.extend((n..np).map(|i| vec![(i, c(lambda_min))]));
    let pad = |v: &DenseVector| DenseVector::from_fn(np, |i, _| if i < n { v[i] } else { c(0.0) });
    Ok(Prepared {
        h: SparseMatrix::from_rows(rows),
        b: pad(&b),
        r: pad(&r),
        dilated,
        padded: true,
        lambda_min,
    })
}

struct PipelineRun {
    record: QlsaRecord,
    exact: PipelineAmplitudes,
    estimated: Option<PipelineAmplitudes>,
    n: usize,
    c_b: f64,
    c_r: f64,
    c: f64,
    exponentials: u64,
    b_calls: u64,
    r_calls: u64,
    failure: Option<String>,
}

/// Mean `|a_est - a|` of amplitude estimation over the five raw readout
/// probabilities `sin^2 phi_b`, `P(a_b a_x = 11)`, `sin^2 phi_r`, `P_1110`, `P_1111`.
fn ae_mean_abs_error(exact: &PipelineAmplitudes, bits: u32, seed: u64) -> Result<f64> {
    let probs = [
        exact.sin2_phi_b.value,
        exact.sin2_phi_b.value * exact.sin2_phi_x.value,
        exact.sin2_phi_r.value,
        exact.p_1110.value,
        exact.p_1111.value,
    ];
    let mut err = 0.0;
    for (k, a) in probs.iter().enumerate() {
        let a = a.clamp(0.0, 1.0);
        err += (amplitude_estimate_probability(a, bits, seed.wrapping_add(k as u64))?.estimate - a)
            .abs();
    }
    Ok(err / probs.len() as f64)
}

fn ae_seed(seed: u64, repeat: usize) -> u64 {
    seed.wrapping_add(100 + 10 * repeat as u64)
}

fn pipeline(p: &Prepared, q: &QlsaConfig, seed: u64) -> Result<PipelineRun> {
    let t0 = match q.t0 {
        T0Policy::MinEigenvalue => QlsaParams::t0_for_min_eigenvalue(p.lambda_min),
        T0Policy::Unit => 2.0 * PI,
        T0Policy::Fixed(t0) => t0,
    };
    let mut params = QlsaParams::exact(t0);
    params.c = q.c;
    params.backend = q.backend;
    params.trotter_order = q.trotter_order;
    params.trotter_steps = q.trotter_steps;
    params.validate()?;
    let layout = RegisterLayout::for_dimension(p.h.dim(), q.clock_qubits)?;
    let bo = VectorOracle::from_vector(&p.b)?;
    let ro = VectorOracle::from_vector(&p.r)?;
    let out = run_qlsa(&p.h, &bo, &params, &layout)?;
    let x = dense_solve(&p.h, &p.b)?;
    let exact = exact_pipeline_amplitudes(&out, &ro)?;
    let overlap = exact.overlap()?;
    let rhat = &p.r / c(p.r.norm());
    let xhat = &x / c(x.norm());
    let dense_overlap = rhat.dotc(&xhat).norm_sqr();
    let trotter_state_error = if q.backend == Backend::Trotter {
        let reference = run_qlsa(
            &p.h,
            &bo,
            &QlsaParams {
                backend: Backend::Exact,
                ..params.clone()
            },
            &layout,
        )?;
        let d: f64 = out
            .state
            .amplitudes()
            .iter()
            .zip(reference.state.amplitudes())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Some(d.sqrt())
    } else {
        None
    };
    let mut failure = None;
    let (estimated, overlap_estimate, ae_err) = match q.ae_bits {
        Some(bits) => {
            let mut err = 0.0;
            for rep in 0..q.ae_repeats {
                err += ae_mean_abs_error(&exact, bits, ae_seed(seed, rep))?;
            }
            let est = match estimate_from_exact(&exact, bits, ae_seed(seed, 0)) {
                Ok(e) => Some(e),
                Err(qlsa_core::Error::Degenerate(msg)) => {
                    failure = Some(format!("amplitude estimation: {msg}"));
                    None
                }
                Err(e) => return Err(e.into()),
            };
            let overlap_estimate = match est.map(|e| e.overlap()).transpose() {
                Ok(o) => o,
                Err(e) => {
                    failure = Some(format!("amplitude estimation: {e}"));
                    None
                }
            };
            (est, overlap_estimate, Some(err / q.ae_repeats as f64))
        }
        None => (None, None, None),
    };
    let record = QlsaRecord {
        hamiltonian_dim: p.h.dim(),
        dilated: p.dilated,
        padded: p.padded,
        preconditioned: false,
        clock_qubits: q.clock_qubits,
        total_qubits: layout.total_qubits(),
        t0,
        c: out.c,
        backend: q.backend,
        fidelity: out.fidelity(&x),
        clock_leakage: out.clock_leakage,
        aliased: out.diagnostics.aliased,
        amplitudes: exact,
        overlap,
        dense_overlap,
        ae_bits: q.ae_bits,
        estimated,
        overlap_estimate,
        ae_mean_abs_error: ae_err,
        trotter_state_error,
    };
    Ok(PipelineRun {
        record,
        exact,
        estimated,
        n: p.h.dim(),
        c_b: bo.scale(),
        c_r: ro.scale(),
        c: out.c,
        exponentials: out.exponentials,
        b_calls: bo.calls(),
        r_calls: ro.calls(),
        failure,
    })
}

fn run_failure(run: &PipelineRun) -> Option<String> {
    let aliased = run
        .record
        .aliased
        .then(|| "eigenvalue outside the signed clock range (aliased)".to_string());
    let all: Vec<String> = aliased.into_iter().chain(run.failure.clone()).collect();
    (!all.is_empty()).then(|| all.join("; "))
}

pub fn cmd_qlsa(cfg: &RunConfig, name: &str) -> Result<ResultRecord> {
    let q = cfg.qlsa.as_ref().ok_or_else(|| invalid("missing [qlsa]"))?;
    let m = materialize(cfg)?;
    let n = m.a.dim();
    let mut rec = ResultRecord::new("qlsa", name, cfg.seed, n, m.a.nnz());
    let r = match &m.fem {
        Some(f) => f.system.far_field.map(|z| z.conj()),
        None => vector(
            q.observable.as_ref().unwrap_or(&VectorSource::Random),
            n,
            cfg.seed.wrapping_add(2),
        )?,
    };
    let (a, b) = if q.precondition {
        let spai = cfg
            .spai
            .as_ref()
            .ok_or_else(|| invalid("qlsa.precondition needs [spai]"))?;
        let p = build_preconditioner(&m.a, spai)?;
        let counter = CountingOracle::new(&m.a);
        let ma = collect_oracle(&PreconditionedOracle {
            a: &counter,
            precond: &p,
        })?;
        rec.counters.a_oracle_calls = counter.calls();
        let mb = (0..n)
            .map(|j| preconditioned_rhs_element(&p, |i| Ok(m.b[i]), j))
            .collect::<qlsa_core::Result<Vec<_>>>()?;
        rec.conditioning = Some(conditioning(&m.a, Some(&p))?);
        (ma, DenseVector::from_vec(mb))
    } else {
        (m.a.clone(), m.b.clone())
    };
    let run = pipeline(&prepare(&a, &b, &r)?, q, cfg.seed)?;
    rec.failure = run_failure(&run);
    rec.counters.exponentials = run.exponentials;
    rec.counters.b_oracle_calls = run.b_calls;
    rec.counters.r_oracle_calls = run.r_calls;
    rec.qlsa = Some(QlsaRecord {
        preconditioned: q.precondition,
        ..run.record
    });
    Ok(rec)
}

fn restore(run: &PipelineRun, amps: &PipelineAmplitudes, cs: CrossSection) -> Result<Amplitude> {
    Ok(quantum_rcs(amps, run.n, run.c_b, run.c_r, run.c, cs)?)
}

pub fn cmd_rcs(cfg: &RunConfig, name: &str) -> Result<ResultRecord> {
    let m = materialize(cfg)?;
    let fem = m
        .fem
        .as_ref()
        .ok_or_else(|| invalid("rcs needs a FEM system"))?;
    let sys = &fem.system;
    let mut rec = ResultRecord::new("rcs", name, cfg.seed, sys.dim(), sys.matrix.nnz());
    let classical = sys.classical_rcs(&sys.solve()?)?;
    let reference = match reference_solution(&fem.problem) {
        Ok(r) => Some(r.cross_section),
        Err(qlsa_core::Error::Unsupported(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let mut out = RcsRecord {
        kind: sys.cross_section.label().to_string(),
        classical,
        reference,
        reference_relative_error: reference
            .map(|r| (classical - r).abs() / r.abs().max(f64::MIN_POSITIVE)),
        quantum_path: "none".into(),
        quantum_target: None,
        quantum: None,
        quantum_estimate: None,
    };
    let path = cfg.rcs.clone().unwrap_or_default().quantum;
    if path != QuantumPath::None {
        let q = cfg.qlsa.as_ref().ok_or_else(|| invalid("missing [qlsa]"))?;
        let (prepared, target) = match path {
            QuantumPath::Surrogate { lmin } => {
                let s = spectral_surrogate(sys, lmin, q.clock_qubits)?;
                out.quantum_path = "surrogate".into();
                let p = prepare(&s.matrix, &s.rhs, &s.far_field.map(|z| z.conj()))?;
                (p, s.classical_rcs()?)
            }
            _ => {
                out.quantum_path = "dilated".into();
                (
                    prepare(&sys.matrix, &sys.rhs, &sys.far_field.map(|z| z.conj()))?,
                    classical,
                )
            }
        };
        let run = pipeline(&prepared, q, cfg.seed)?;
        out.quantum_target = Some(target);
        out.quantum = Some(restore(&run, &run.exact, sys.cross_section)?);
        out.quantum_estimate = match &run.estimated {
            Some(est) => restore(&run, est, sys.cross_section).ok(),
            None => None,
        };
        rec.counters.exponentials = run.exponentials;
        rec.counters.b_oracle_calls = run.b_calls;
        rec.counters.r_oracle_calls = run.r_calls;
        rec.failure = run_failure(&run);
        rec.qlsa = Some(run.record);
    }
    rec.rcs = Some(out);
    Ok(rec)
}
