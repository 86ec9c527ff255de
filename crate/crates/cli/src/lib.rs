//! Configuration-driven experiment runner for `qsd-core`.
//!
//! `qsd <kind> --config <file>` parses a TOML config, resolves the model,
//! runs one experiment and writes `report.txt`, `report.csv` and CSV tables.

pub mod config;
pub mod error;
pub mod experiments;
pub mod models;

use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, ExperimentKind, Section};
pub use error::{CliError, CliResult};
pub use experiments::{run_experiment, write_outcome, Outcome};
pub use models::{build_model, Model};

/// Output directory when neither `--out` nor `out` is given.
pub const DEFAULT_OUT: &str = "qsd-out";

/// Loads `config`, applies the overrides, runs and writes the artifacts.
/// Returns the outcome and the output directory.
pub fn run(kind: ExperimentKind, config: &Path, out: Option<&Path>, seed: Option<u64>) -> CliResult<(Outcome, PathBuf)> {
    let mut cfg = ExperimentConfig::load(config, kind)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let dir = match (out, &cfg.out) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(o)) => cfg.base_dir.join(o),
        (None, None) => PathBuf::from(DEFAULT_OUT),
    };
    let outcome = run_experiment(&cfg).map_err(|e| e.in_file(config))?;
    write_outcome(&outcome, &dir)?;
    Ok((outcome, dir))
}
