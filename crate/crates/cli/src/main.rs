//! `georestrict`: batch front end for the verification suites.

mod config;
mod report;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use config::{load_config, Exponent, Format, PartialConfig, RunConfig, Subcommand, OUT_DIR_ENV};
use report::{write_report, Report};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}:{line}:{column}: {message}")]
    Config {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Parser)]
#[command(
    name = "georestrict",
    version,
    about = "Numerical checks for geodesic restriction estimates",
    arg_required_else_help = true,
    after_help = "Exit status: 0 all checks pass, 2 some check failed, 1 usage or I/O error.\n\
                  Relative output paths are resolved against $GEORESTRICT_OUT_DIR when set."
)]
struct Cli {
    /// Suite to run.
    #[arg(value_enum)]
    command: Subcommand,
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Horizons T (comma separated, each >= 2).
    #[arg(long = "T", value_delimiter = ',')]
    t_list: Option<Vec<f64>>,
    /// Frequencies lambda (comma separated, each >= 8).
    #[arg(long = "lambda", value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    /// Grid cells per unit interval for extremum scans.
    #[arg(long)]
    grid: Option<usize>,
    /// Random samples per horizon.
    #[arg(long)]
    samples: Option<usize>,
    /// Exponents p (comma separated, `inf` allowed).
    #[arg(long = "p", value_delimiter = ',')]
    p_list: Option<Vec<Exponent>>,
    /// Spherical harmonic degrees (comma separated).
    #[arg(long = "n", value_delimiter = ',')]
    degrees: Option<Vec<usize>>,
    /// Tube radius R.
    #[arg(long)]
    radius: Option<f64>,
    /// Sub-case: line, disjoint, crossing-near, crossing-far (bound-scan);
    /// nondegenerate, degenerate (kernel-decay); product, fold, circle
    /// (opnorm-scaling); or all.
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Cli {
    fn flags(&self) -> PartialConfig {
        PartialConfig {
            t_list: self.t_list.clone(),
            lambdas: self.lambdas.clone(),
            grid: self.grid,
            samples: self.samples,
            p_list: self.p_list.clone(),
            degrees: self.degrees.clone(),
            radius: self.radius,
            case: self.case.clone(),
            seed: self.seed,
            out: self.out.clone(),
            format: self.format,
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let file = match &cli.config {
        Some(p) => load_config(p)?,
        None => PartialConfig::default(),
    };
    let out_dir = std::env::var_os(OUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from);
    let cfg = RunConfig::resolve(cli.command, file.merged(cli.flags()), out_dir)?;
    let records = suites::run_suite(&cfg)?;
    let report = Report::new(&cfg, records);
    write_report(&report, cfg.out.as_deref(), cfg.format)?;
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
