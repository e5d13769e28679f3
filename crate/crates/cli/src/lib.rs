//! Experiment driver for the `qlsa` command-line tool.

pub mod config;
pub mod error;
pub mod record;
pub mod report;
pub mod run;

use std::path::{Path, PathBuf};

pub use config::{Experiment, RunConfig};
pub use error::CliError;
pub use record::{ResultRecord, SCHEMA_VERSION};
pub use run::execute;

/// Writes `<dir>/<stem>.json` and `<dir>/<stem>.tsv`; returns both paths.
pub fn write_outputs(
    dir: &Path,
    stem: &str,
    records: &[ResultRecord],
) -> Result<(PathBuf, PathBuf), CliError> {
    std::fs::create_dir_all(dir)?;
    let json = dir.join(format!("{stem}.json"));
    let tsv = dir.join(format!("{stem}.tsv"));
    std::fs::write(&json, record::to_json(records)?)?;
    std::fs::write(&tsv, record::to_table(records))?;
    Ok((json, tsv))
}
