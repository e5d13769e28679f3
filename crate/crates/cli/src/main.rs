use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qlsa_cli::record::read_records;
use qlsa_cli::{execute, report, write_outputs, CliError, Experiment, ResultRecord, RunConfig};

#[derive(Parser)]
#[command(
    name = "qlsa",
    version,
    about = "Run quantum linear-solver, SPAI and FEM scattering experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides `[output] dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed; overrides the config seed.
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
    #[arg(long)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Classical CG solve, optionally SPAI-preconditioned.
    Solve(RunArgs),
    /// Build a SPAI preconditioner and check its condition-number bound.
    Spai(RunArgs),
    /// Full simulated quantum pipeline against a dense solve.
    Qlsa(RunArgs),
    /// FEM scattering: classical, quantum and reference cross sections.
    Rcs(RunArgs),
    /// Parallel parameter sweep over one of the other experiments.
    Sweep(RunArgs),
    /// Summarize record files.
    Report {
        /// Record files; with none given, every `.json` in `--out` is read.
        files: Vec<PathBuf>,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        #[arg(long)]
        verbose: bool,
    },
}

fn run(experiment: Experiment, args: &RunArgs) -> Result<Vec<ResultRecord>, CliError> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let records = execute(experiment, &cfg, args.verbose)?;
    let dir = args.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    let stem = cfg
        .output
        .stem
        .clone()
        .unwrap_or_else(|| cfg.name_or(experiment.name()));
    let (json, tsv) = write_outputs(&dir, &stem, &records)?;
    if args.verbose {
        eprintln!("wrote {} and {}", json.display(), tsv.display());
    }
    print!("{}", report::render(&records));
    Ok(records)
}

fn report_files(files: &[PathBuf], out: Option<&PathBuf>) -> Result<Vec<ResultRecord>, CliError> {
    let mut paths = files.to_vec();
    if paths.is_empty() {
        let dir =
            out.ok_or_else(|| qlsa_cli::error::invalid("report needs record files or --out DIR"))?;
        let mut found: Vec<PathBuf> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        found.sort();
        paths = found;
    }
    let mut records = Vec::new();
    for p in &paths {
        records.extend(read_records(p)?);
    }
    print!("{}", report::render(&records));
    Ok(records)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => run(Experiment::Solve, a),
        Command::Spai(a) => run(Experiment::Spai, a),
        Command::Qlsa(a) => run(Experiment::Qlsa, a),
        Command::Rcs(a) => run(Experiment::Rcs, a),
        Command::Sweep(a) => run(Experiment::Sweep, a),
        Command::Report {
            files,
            out,
            verbose,
        } => {
            let r = report_files(files, out.as_ref());
            if *verbose {
                if let Ok(recs) = &r {
                    eprintln!("read {} record(s)", recs.len());
                }
            }
            r
        }
    };
    match result {
        Ok(records) if records.iter().any(|r| r.failure.is_some()) => ExitCode::from(2),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qlsa: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
