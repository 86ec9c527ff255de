use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qsd_cli::{run, ExperimentKind};

/// Runs one quasi-stationary experiment from a config file.
#[derive(Debug, Parser)]
#[command(name = "qsd", version)]
struct Args {
    /// finite-verify, two-sided-fit, simulate, fleming-viot, certify-A,
    /// gradient, boundary-return, scale1d or decay-report.
    kind: ExperimentKind,
    /// TOML config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides `seed` in the config).
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args.kind, &args.config, args.out.as_deref(), args.seed) {
        Ok((outcome, dir)) => {
            print!("{}", outcome.report);
            let failed = outcome.report.failures().count();
            println!("{}: {} checks, {failed} failed; artifacts in {}", outcome.kind, outcome.report.checks().len(), dir.display());
            if outcome.pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
