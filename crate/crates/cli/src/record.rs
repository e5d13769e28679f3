//! Versioned result records and their columnar table form.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use qlsa_core::qsim::{Amplitude, Backend, PipelineAmplitudes};
use qlsa_core::Side;

use crate::error::{invalid, CliError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPoint {
    pub parameter: String,
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveRecord {
    /// `cg` or `cgnr`.
    pub method: String,
    pub iterations: usize,
    pub converged: bool,
    pub relative_residual: f64,
    /// `|x - x_dense| / |x_dense|`, when the dense reference fits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditioningRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_preconditioned: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_pre: Option<f64>,
    /// Row sparsity `d` of `A` used in the bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// `sqrt(d) eps_pre`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_radius: Option<f64>,
    /// `(1 + sqrt(d) eps_pre) / (1 - sqrt(d) eps_pre)`, when the radius is below 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QlsaRecord {
    /// Dimension of the simulated Hamiltonian after dilation and padding.
    pub hamiltonian_dim: usize,
    pub dilated: bool,
    pub padded: bool,
    pub preconditioned: bool,
    pub clock_qubits: usize,
    pub total_qubits: usize,
    pub t0: f64,
    pub c: f64,
    pub backend: Backend,
    pub fidelity: f64,
    pub clock_leakage: f64,
    pub aliased: bool,
    pub amplitudes: PipelineAmplitudes,
    pub overlap: Amplitude,
    /// `|<r|x>|^2` from the dense solution.
    pub dense_overlap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ae_bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimated: Option<PipelineAmplitudes>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlap_estimate: Option<Amplitude>,
    /// Mean `|a_est - a|` over the five estimated readouts and all repeats.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ae_mean_abs_error: Option<f64>,
    /// `|psi_trotter - psi_exact|` of the final pipeline state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trotter_state_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RcsRecord {
    /// `rcs3d`, `echo width` or `reflectance`.
    pub kind: String,
    pub classical: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_relative_error: Option<f64>,
    /// `none`, `dilated` or `surrogate`.
    pub quantum_path: String,
    /// Classical value of the system the quantum path actually solves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantum_target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantum: Option<Amplitude>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantum_estimate: Option<Amplitude>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Counters {
    /// Row queries of `A` made through the preconditioned row oracle.
    pub a_oracle_calls: u64,
    /// Largest per-row count of those queries.
    pub a_oracle_calls_per_row: u64,
    pub b_oracle_calls: u64,
    pub r_oracle_calls: u64,
    pub exponentials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultRecord {
    pub schema: u32,
    pub experiment: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<SweepPoint>,
    pub seed: u64,
    pub dimension: usize,
    pub nnz: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preconditioned_solve: Option<SolveRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditioning: Option<ConditioningRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qlsa: Option<QlsaRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rcs: Option<RcsRecord>,
    pub counters: Counters,
    /// Set when the run hit a numerical failure (non-convergence, aliasing).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub wall_time_s: f64,
}

impl ResultRecord {
    pub fn new(experiment: &str, name: &str, seed: u64, dimension: usize, nnz: usize) -> Self {
        ResultRecord {
            schema: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            name: name.to_string(),
            point: None,
            seed,
            dimension,
            nnz,
            solve: None,
            preconditioned_solve: None,
            conditioning: None,
            qlsa: None,
            rcs: None,
            counters: Counters::default(),
            failure: None,
            wall_time_s: 0.0,
        }
    }

    /// Copy with the wall time zeroed, for determinism comparisons.
    pub fn without_timing(&self) -> Self {
        ResultRecord {
            wall_time_s: 0.0,
            ..self.clone()
        }
    }

    /// Schema version matches and every numeric field is finite.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != SCHEMA_VERSION {
            return Err(invalid(format!(
                "record schema {} != supported {SCHEMA_VERSION}",
                self.schema
            )));
        }
        let v = serde_json::to_value(self).map_err(|e| invalid(e.to_string()))?;
        // non-finite floats serialize as null; absent options are skipped
        match first_null(&v, String::new()) {
            Some(path) => Err(invalid(format!(
                "record {}: non-finite value at {path}",
                self.name
            ))),
            None => Ok(()),
        }
    }
}

fn first_null(v: &serde_json::Value, path: String) -> Option<String> {
    match v {
        serde_json::Value::Null => Some(if path.is_empty() {
            "<root>".into()
        } else {
            path
        }),
        serde_json::Value::Array(a) => a
            .iter()
            .enumerate()
            .find_map(|(i, x)| first_null(x, format!("{path}[{i}]"))),
        serde_json::Value::Object(m) => m
            .iter()
            .find_map(|(k, x)| first_null(x, format!("{path}.{k}"))),
        _ => None,
    }
}

pub fn to_json(records: &[ResultRecord]) -> Result<String, CliError> {
    for r in records {
        r.validate()?;
    }
    serde_json::to_string_pretty(records).map_err(|e| invalid(e.to_string()))
}

pub fn from_json(text: &str) -> Result<Vec<ResultRecord>, CliError> {
    let records: Vec<ResultRecord> =
        serde_json::from_str(text).map_err(|e| invalid(format!("record file: {e}")))?;
    for r in &records {
        r.validate()?;
    }
    Ok(records)
}

pub fn read_records(path: &Path) -> Result<Vec<ResultRecord>, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    from_json(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

pub const TABLE_COLUMNS: [&str; 20] = [
    "experiment",
    "name",
    "parameter",
    "value",
    "seed",
    "n",
    "iterations",
    "iterations_pre",
    "kappa",
    "kappa_pre",
    "eps_pre",
    "bound",
    "fidelity",
    "overlap",
    "overlap_est",
    "rcs_classical",
    "rcs_quantum",
    "rcs_reference",
    "exponentials",
    "failure",
];

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Tab-separated table with one row per record; empty cells for absent values.
pub fn to_table(records: &[ResultRecord]) -> String {
    let mut out = TABLE_COLUMNS.join("\t");
    out.push('\n');
    for r in records {
        let cond = r.conditioning.as_ref();
        let q = r.qlsa.as_ref();
        let rcs = r.rcs.as_ref();
        let row = [
            r.experiment.clone(),
            r.name.clone(),
            cell(r.point.as_ref().map(|p| p.parameter.clone())),
            cell(r.point.as_ref().map(|p| p.value)),
            r.seed.to_string(),
            r.dimension.to_string(),
            cell(r.solve.as_ref().map(|s| s.iterations)),
            cell(r.preconditioned_solve.as_ref().map(|s| s.iterations)),
            cell(cond.and_then(|c| c.kappa)),
            cell(cond.and_then(|c| c.kappa_preconditioned)),
            cell(cond.and_then(|c| c.eps_pre)),
            cell(cond.and_then(|c| c.bound)),
            cell(q.map(|q| q.fidelity)),
            cell(q.map(|q| q.overlap.value)),
            cell(q.and_then(|q| q.overlap_estimate).map(|a| a.value)),
            cell(rcs.map(|x| x.classical)),
            cell(rcs.and_then(|x| x.quantum).map(|a| a.value)),
            cell(rcs.and_then(|x| x.reference)),
            r.counters.exponentials.to_string(),
            cell(r.failure.clone()),
        ];
        let _ = writeln!(out, "{}", row.join("\t"));
    }
    out
}
