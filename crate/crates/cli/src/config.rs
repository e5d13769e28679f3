//! TOML run configuration and its validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qlsa_core::fem::AbsorbingBoundary;
use qlsa_core::qsim::{Backend, MAX_AE_BITS};
use qlsa_core::{ScatteringProblem, Side};

use crate::error::{invalid, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Solve,
    Spai,
    Qlsa,
    Rcs,
    Sweep,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Solve => "solve",
            Experiment::Spai => "spai",
            Experiment::Qlsa => "qlsa",
            Experiment::Rcs => "rcs",
            Experiment::Sweep => "sweep",
        }
    }
}

/// Where the system matrix comes from. Generated families use the run seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSource {
    Identity {
        n: usize,
    },
    /// Tridiagonal `(-1, 2, -1)`.
    Laplacian {
        n: usize,
    },
    DiagonallyDominant {
        n: usize,
        offdiag: usize,
        ratio: f64,
    },
    /// Dense Hermitian matrix with the given eigenvalues in a seeded random basis.
    Spectrum {
        eigenvalues: Vec<f64>,
    },
    MatrixMarket {
        path: PathBuf,
    },
    FemSlab {
        wavenumber: f64,
        length: f64,
        nodes: usize,
    },
    FemCircle {
        wavenumber: f64,
        radius: f64,
        outer_radius: f64,
        rings: usize,
        sectors: usize,
        #[serde(default)]
        absorbing: AbsorbingBoundary,
    },
    FemMesh {
        path: PathBuf,
        problem: ScatteringProblem,
    },
}

impl SystemSource {
    pub fn is_fem(&self) -> bool {
        matches!(
            self,
            SystemSource::FemSlab { .. }
                | SystemSource::FemCircle { .. }
                | SystemSource::FemMesh { .. }
        )
    }

    fn resizable(&self) -> bool {
        !matches!(
            self,
            SystemSource::Spectrum { .. }
                | SystemSource::MatrixMarket { .. }
                | SystemSource::FemMesh { .. }
        )
    }

    /// Applies a sweep size: `n` for generated matrices, node count for the
    /// slab, and a refinement factor on both ring and sector counts for the circle.
    pub fn resized(&self, size: usize) -> Option<SystemSource> {
        let mut s = self.clone();
        match &mut s {
            SystemSource::Identity { n }
            | SystemSource::Laplacian { n }
            | SystemSource::DiagonallyDominant { n, .. } => *n = size,
            SystemSource::FemSlab { nodes, .. } => *nodes = size,
            SystemSource::FemCircle { rings, sectors, .. } => {
                *rings *= size;
                *sectors *= size;
            }
            _ => return None,
        }
        Some(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VectorSource {
    Random,
    Ones,
    Basis { index: usize },
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Defaults to `50 N`.
    #[serde(default)]
    pub max_iter: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: default_tol(),
            max_iter: None,
        }
    }
}

fn default_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaiConfig {
    #[serde(default = "default_level")]
    pub level: u8,
    #[serde(default)]
    pub side: Side,
}

fn default_level() -> u8 {
    1
}

/// How the evolution time `t0` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum T0Policy {
    /// `2 pi / |lambda|_min`: the smallest eigenvalue lands on clock value 1.
    #[default]
    MinEigenvalue,
    /// `t0 = 2 pi`: integer eigenvalues sit on the grid.
    Unit,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QlsaConfig {
    pub clock_qubits: usize,
    #[serde(default)]
    pub t0: T0Policy,
    /// Inversion constant; defaults to the grid spacing `2 pi / t0`.
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default = "default_order")]
    pub trotter_order: u8,
    #[serde(default = "default_steps")]
    pub trotter_steps: usize,
    /// Amplitude-estimation bits; exact readouts only when absent.
    #[serde(default)]
    pub ae_bits: Option<u32>,
    #[serde(default = "default_repeats")]
    pub ae_repeats: usize,
    /// Swap-test reference state for non-FEM systems; FEM runs use the far-field vector.
    #[serde(default)]
    pub observable: Option<VectorSource>,
    /// Run the pipeline on the SPAI-preconditioned system `MA x = Mb`.
    #[serde(default)]
    pub precondition: bool,
}

fn default_order() -> u8 {
    2
}

fn default_steps() -> usize {
    8
}

fn default_repeats() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum QuantumPath {
    /// Classical and reference cross sections only.
    None,
    /// Hermitian dilation of the FEM operator, generally off the clock grid.
    #[default]
    Dilated,
    /// Diagonal surrogate with singular values snapped to clock values, smallest at `lmin`.
    Surrogate {
        #[serde(default = "default_lmin")]
        lmin: u32,
    },
}

fn default_lmin() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RcsConfig {
    #[serde(default)]
    pub quantum: QuantumPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Size,
    ClockQubits,
    AeBits,
    Level,
    TrotterSteps,
    Seed,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Size => "size",
            SweepParameter::ClockQubits => "clock_qubits",
            SweepParameter::AeBits => "ae_bits",
            SweepParameter::Level => "level",
            SweepParameter::TrotterSteps => "trotter_steps",
            SweepParameter::Seed => "seed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub run: Experiment,
    pub parameter: SweepParameter,
    pub values: Vec<u64>,
    /// Worker threads; defaults to the rayon global pool.
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// File stem; defaults to the run name.
    #[serde(default)]
    pub stem: Option<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_dir(),
            stem: None,
        }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Run name, used for labels and the default output stem.
    #[serde(default)]
    pub name: Option<String>,
    pub seed: u64,
    pub system: SystemSource,
    #[serde(default)]
    pub rhs: Option<VectorSource>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub spai: Option<SpaiConfig>,
    #[serde(default)]
    pub qlsa: Option<QlsaConfig>,
    #[serde(default)]
    pub rcs: Option<RcsConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| invalid(format!("config: {e}")))
    }

    /// Reads a config and resolves its relative paths against the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.system {
            SystemSource::MatrixMarket { path } | SystemSource::FemMesh { path, .. } => fix(path),
            _ => {}
        }
        for v in [
            self.rhs.as_mut(),
            self.qlsa.as_mut().and_then(|q| q.observable.as_mut()),
        ]
        .into_iter()
        .flatten()
        {
            if let VectorSource::File { path } = v {
                fix(path);
            }
        }
    }

    pub fn name_or(&self, fallback: &str) -> String {
        self.name.clone().unwrap_or_else(|| fallback.to_string())
    }

    /// Strict checks run before any computation.
    pub fn validate(&self, experiment: Experiment) -> Result<(), CliError> {
        validate_system(&self.system)?;
        if let Some(rhs) = &self.rhs {
            if self.system.is_fem() {
                return Err(invalid(
                    "FEM systems assemble their own right-hand side; remove [rhs]",
                ));
            }
            validate_vector(rhs)?;
        }
        if !(self.solver.tol > 0.0 && self.solver.tol < 1.0) {
            return Err(invalid(format!(
                "solver.tol must lie in (0, 1), got {}",
                self.solver.tol
            )));
        }
        if self.solver.max_iter == Some(0) {
            return Err(invalid("solver.max_iter must be positive"));
        }
        if let Some(s) = &self.spai {
            if s.level > 2 {
                return Err(invalid(format!(
                    "spai.level must be 0, 1 or 2, got {}",
                    s.level
                )));
            }
        }
        if let Some(q) = &self.qlsa {
            validate_qlsa(q, self.spai.as_ref(), self.system.is_fem())?;
        }
        match (experiment, &self.sweep) {
            (Experiment::Sweep, None) => return Err(invalid("sweep needs a [sweep] section")),
            (Experiment::Sweep, Some(sw)) => self.validate_sweep(sw)?,
            (_, Some(_)) => return Err(invalid("[sweep] is only valid for the sweep command")),
            _ => {}
        }
        self.validate_run(experiment)
    }

    fn validate_run(&self, experiment: Experiment) -> Result<(), CliError> {
        match experiment {
            Experiment::Spai if self.spai.is_none() => Err(invalid("spai needs a [spai] section")),
            Experiment::Qlsa if self.qlsa.is_none() => Err(invalid("qlsa needs a [qlsa] section")),
            Experiment::Rcs => {
                if !self.system.is_fem() {
                    return Err(invalid(
                        "rcs needs a FEM system (fem_slab, fem_circle or fem_mesh)",
                    ));
                }
                match self.rcs.clone().unwrap_or_default().quantum {
                    QuantumPath::None => Ok(()),
                    path => {
                        let q = self
                            .qlsa
                            .as_ref()
                            .ok_or_else(|| invalid("a quantum rcs path needs a [qlsa] section"))?;
                        if q.precondition {
                            return Err(invalid("qlsa.precondition is not supported by rcs"));
                        }
                        if let QuantumPath::Surrogate { lmin } = path {
                            if lmin == 0 {
                                return Err(invalid("rcs.quantum.lmin must be at least 1"));
                            }
                            if q.t0 != T0Policy::Unit {
                                return Err(invalid("the surrogate path puts clock values on integers; set qlsa.t0 = \"unit\""));
                            }
                        }
                        Ok(())
                    }
                }
            }
            _ => Ok(()),
        }
    }

    fn validate_sweep(&self, sw: &SweepConfig) -> Result<(), CliError> {
        if sw.run == Experiment::Sweep {
            return Err(invalid("sweep.run cannot itself be sweep"));
        }
        if sw.values.is_empty() {
            return Err(invalid("sweep.values is empty"));
        }
        if sw.threads == Some(0) {
            return Err(invalid("sweep.threads must be positive"));
        }
        let needs = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(invalid(format!(
                    "sweeping {} needs {what}",
                    sw.parameter.name()
                )))
            }
        };
        match sw.parameter {
            SweepParameter::Size => needs(
                self.system.resizable(),
                "a generated system or fem_slab/fem_circle",
            )?,
            SweepParameter::ClockQubits | SweepParameter::AeBits => {
                needs(self.qlsa.is_some(), "a [qlsa] section")?
            }
            SweepParameter::TrotterSteps => needs(
                self.qlsa
                    .as_ref()
                    .is_some_and(|q| q.backend == Backend::Trotter),
                "qlsa.backend = \"trotter\"",
            )?,
            SweepParameter::Level => needs(self.spai.is_some(), "a [spai] section")?,
            SweepParameter::Seed => {}
        }
        for &v in &sw.values {
            self.point(sw.parameter, v)?.validate(sw.run)?;
        }
        Ok(())
    }

    /// The config of one sweep point, with the sweep section removed.
    pub fn point(&self, parameter: SweepParameter, value: u64) -> Result<RunConfig, CliError> {
        let mut cfg = self.clone();
        cfg.sweep = None;
        let v = usize::try_from(value)
            .map_err(|_| invalid(format!("sweep value {value} too large")))?;
        match parameter {
            SweepParameter::Size => {
                cfg.system = self
                    .system
                    .resized(v)
                    .ok_or_else(|| invalid("system cannot be resized"))?;
            }
            SweepParameter::ClockQubits => {
                if let Some(q) = cfg.qlsa.as_mut() {
                    q.clock_qubits = v
                }
            }
            SweepParameter::AeBits => {
                let bits =
                    u32::try_from(v).map_err(|_| invalid(format!("ae_bits {v} too large")))?;
                if let Some(q) = cfg.qlsa.as_mut() {
                    q.ae_bits = Some(bits)
                }
            }
            SweepParameter::Level => {
                let level = u8::try_from(v).map_err(|_| invalid(format!("level {v} too large")))?;
                if let Some(s) = cfg.spai.as_mut() {
                    s.level = level
                }
            }
            SweepParameter::TrotterSteps => {
                if let Some(q) = cfg.qlsa.as_mut() {
                    q.trotter_steps = v
                }
            }
            SweepParameter::Seed => cfg.seed = value,
        }
        Ok(cfg)
    }
}

fn exists(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(invalid(format!("file not found: {}", path.display())))
    }
}

fn positive(x: f64, what: &str) -> Result<(), CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!(
            "{what} must be positive and finite, got {x}"
        )))
    }
}

fn validate_system(s: &SystemSource) -> Result<(), CliError> {
    match s {
        SystemSource::Identity { n } | SystemSource::Laplacian { n } if *n == 0 => {
            Err(invalid("system.n must be positive"))
        }
        SystemSource::DiagonallyDominant { n, offdiag, ratio } => {
            if *n < 2 || *offdiag == 0 || *offdiag >= *n {
                return Err(invalid(
                    "diagonally_dominant needs n >= 2 and 0 < offdiag < n",
                ));
            }
            if !(ratio.is_finite() && *ratio > 1.0) {
                return Err(invalid(format!(
                    "diagonally_dominant.ratio must exceed 1, got {ratio}"
                )));
            }
            Ok(())
        }
        SystemSource::Spectrum { eigenvalues } => {
            if eigenvalues.is_empty() || eigenvalues.iter().any(|l| !l.is_finite() || *l == 0.0) {
                return Err(invalid(
                    "spectrum.eigenvalues must be nonempty, finite and nonzero",
                ));
            }
            Ok(())
        }
        SystemSource::MatrixMarket { path } => exists(path),
        SystemSource::FemSlab {
            wavenumber,
            length,
            nodes,
        } => {
            positive(*wavenumber, "fem_slab.wavenumber")?;
            positive(*length, "fem_slab.length")?;
            if *nodes < 3 {
                return Err(invalid("fem_slab.nodes must be at least 3"));
            }
            Ok(())
        }
        SystemSource::FemCircle {
            wavenumber,
            radius,
            outer_radius,
            rings,
            sectors,
            ..
        } => {
            positive(*wavenumber, "fem_circle.wavenumber")?;
            positive(*radius, "fem_circle.radius")?;
            if !(outer_radius > radius) {
                return Err(invalid("fem_circle.outer_radius must exceed radius"));
            }
            if *rings == 0 || *sectors < 3 {
                return Err(invalid("fem_circle needs rings >= 1 and sectors >= 3"));
            }
            Ok(())
        }
        SystemSource::FemMesh { path, problem } => {
            exists(path)?;
            problem
                .validate()
                .map_err(|e| invalid(format!("fem_mesh.problem: {e}")))
        }
        _ => Ok(()),
    }
}

fn validate_vector(v: &VectorSource) -> Result<(), CliError> {
    match v {
        VectorSource::File { path } => exists(path),
        _ => Ok(()),
    }
}

fn validate_qlsa(q: &QlsaConfig, spai: Option<&SpaiConfig>, fem: bool) -> Result<(), CliError> {
    if q.clock_qubits == 0 || q.clock_qubits > 20 {
        return Err(invalid(format!(
            "qlsa.clock_qubits must lie in 1..=20, got {}",
            q.clock_qubits
        )));
    }
    if let T0Policy::Fixed(t0) = q.t0 {
        positive(t0, "qlsa.t0")?;
    }
    if let Some(c) = q.c {
        positive(c, "qlsa.c")?;
    }
    if !(1..=2).contains(&q.trotter_order) {
        return Err(invalid(format!(
            "qlsa.trotter_order must be 1 or 2, got {}",
            q.trotter_order
        )));
    }
    if q.trotter_steps == 0 {
        return Err(invalid("qlsa.trotter_steps must be positive"));
    }
    if let Some(bits) = q.ae_bits {
        if bits == 0 || bits > MAX_AE_BITS {
            return Err(invalid(format!(
                "qlsa.ae_bits must lie in 1..={MAX_AE_BITS}, got {bits}"
            )));
        }
    }
    if q.ae_repeats == 0 {
        return Err(invalid("qlsa.ae_repeats must be positive"));
    }
    if q.precondition {
        match spai {
            None => return Err(invalid("qlsa.precondition needs a [spai] section")),
            // AM y = b would read out y = M^-1 x rather than x
            Some(s) if s.side != Side::Left => {
                return Err(invalid("qlsa.precondition needs spai.side = \"left\""))
            }
            _ => {}
        }
    }
    if let Some(obs) = &q.observable {
        if fem {
            return Err(invalid(
                "FEM runs read out the far-field vector; remove qlsa.observable",
            ));
        }
        validate_vector(obs)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
seed = 3
[system]
kind = "laplacian"
n = 16
"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = RunConfig::parse(BASE).unwrap();
        assert_eq!(cfg.solver, SolverConfig::default());
        assert_eq!(cfg.output.dir, PathBuf::from("results"));
        cfg.validate(Experiment::Solve).unwrap();
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(RunConfig::parse(&format!("{BASE}\n[solver]\ntolerance = 1e-6\n")).is_err());
        assert!(
            RunConfig::parse("seed = 1\n[system]\nkind = \"laplacian\"\nn = 4\nsize = 9\n")
                .is_err()
        );
    }

    #[test]
    fn seed_is_mandatory() {
        assert!(RunConfig::parse("[system]\nkind = \"identity\"\nn = 4\n").is_err());
    }

    #[test]
    fn t0_policy_forms() {
        let q: QlsaConfig = toml::from_str("clock_qubits = 6\nt0 = { fixed = 12.5 }\n").unwrap();
        assert_eq!(q.t0, T0Policy::Fixed(12.5));
        let q: QlsaConfig = toml::from_str("clock_qubits = 6\nt0 = \"unit\"\n").unwrap();
        assert_eq!(q.t0, T0Policy::Unit);
    }

    #[test]
    fn missing_file_fails_validation() {
        let cfg = RunConfig::parse(
            "seed = 1\n[system]\nkind = \"matrix_market\"\npath = \"/nonexistent/a.mtx\"\n",
        )
        .unwrap();
        assert!(matches!(
            cfg.validate(Experiment::Solve),
            Err(CliError::Validation(_))
        ));
    }

    #[test]
    fn section_requirements() {
        let cfg = RunConfig::parse(BASE).unwrap();
        assert!(cfg.validate(Experiment::Spai).is_err());
        assert!(cfg.validate(Experiment::Qlsa).is_err());
        assert!(cfg.validate(Experiment::Rcs).is_err());
        assert!(cfg.validate(Experiment::Sweep).is_err());
    }

    #[test]
    fn sweep_points_override_one_parameter() {
        let cfg = RunConfig::parse(&format!(
            "{BASE}\n[spai]\nlevel = 1\n[sweep]\nrun = \"spai\"\nparameter = \"size\"\nvalues = [8, 32]\n"
        ))
        .unwrap();
        cfg.validate(Experiment::Sweep).unwrap();
        let p = cfg.point(SweepParameter::Size, 32).unwrap();
        assert_eq!(p.system, SystemSource::Laplacian { n: 32 });
        assert!(p.sweep.is_none());
        let bad = RunConfig::parse(&format!(
            "{BASE}\n[sweep]\nrun = \"solve\"\nparameter = \"ae_bits\"\nvalues = [4]\n"
        ))
        .unwrap();
        assert!(bad.validate(Experiment::Sweep).is_err());
    }

    #[test]
    fn surrogate_requires_unit_grid() {
        let text = r#"
seed = 1
[system]
kind = "fem_circle"
wavenumber = 1.0
radius = 1.0
outer_radius = 3.0
rings = 3
sectors = 4
[qlsa]
clock_qubits = 10
[rcs]
quantum = { kind = "surrogate" }
"#;
        let cfg = RunConfig::parse(text).unwrap();
        assert!(cfg.validate(Experiment::Rcs).is_err());
        let cfg = RunConfig::parse(
            &text.replace("clock_qubits = 10", "clock_qubits = 10\nt0 = \"unit\""),
        )
        .unwrap();
        cfg.validate(Experiment::Rcs).unwrap();
    }
}
