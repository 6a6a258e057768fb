use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Directory that relative `--out` paths (and the default report name) are
/// resolved against.
pub const OUT_DIR_ENV: &str = "GEORESTRICT_OUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }

    fn from_extension(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "json" => Some(Format::Json),
            "csv" => Some(Format::Csv),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    PhaseCheck,
    BoundScan,
    KernelDecay,
    OpnormScaling,
    CircleKernel,
    ModelKernel,
    LorentzCheck,
    SphereExponents,
    All,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::PhaseCheck => "phase-check",
            Subcommand::BoundScan => "bound-scan",
            Subcommand::KernelDecay => "kernel-decay",
            Subcommand::OpnormScaling => "opnorm-scaling",
            Subcommand::CircleKernel => "circle-kernel",
            Subcommand::ModelKernel => "model-kernel",
            Subcommand::LorentzCheck => "lorentz-check",
            Subcommand::SphereExponents => "sphere-exponents",
            Subcommand::All => "all",
        }
    }
}

/// An `L^p` exponent; accepts `inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponent(pub f64);

impl FromStr for Exponent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" => Ok(Exponent(f64::INFINITY)),
            t => t
                .parse::<f64>()
                .map(Exponent)
                .map_err(|e| format!("bad exponent {s:?}: {e}")),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Exponent(x)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Values read from a config file or from flags; every field is optional
/// and flags take precedence field by field.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct PartialConfig {
    #[serde(alias = "T")]
    pub t_list: Option<Vec<f64>>,
    #[serde(alias = "lambda")]
    pub lambdas: Option<Vec<f64>>,
    pub grid: Option<usize>,
    pub samples: Option<usize>,
    #[serde(alias = "p")]
    pub p_list: Option<Vec<Exponent>>,
    #[serde(alias = "n")]
    pub degrees: Option<Vec<usize>>,
    pub radius: Option<f64>,
    pub case: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl PartialConfig {
    /// Fields set in `over` replace those in `self`.
    pub fn merged(self, over: PartialConfig) -> PartialConfig {
        PartialConfig {
            t_list: over.t_list.or(self.t_list),
            lambdas: over.lambdas.or(self.lambdas),
            grid: over.grid.or(self.grid),
            samples: over.samples.or(self.samples),
            p_list: over.p_list.or(self.p_list),
            degrees: over.degrees.or(self.degrees),
            radius: over.radius.or(self.radius),
            case: over.case.or(self.case),
            seed: over.seed.or(self.seed),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
        }
    }
}

/// Reads a JSON config; an empty (or whitespace-only) file means all
/// defaults.
pub fn load_config(path: &Path) -> Result<PartialConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    if text.trim().is_empty() {
        return Ok(PartialConfig::default());
    }
    serde_json::from_str(&text).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Fully resolved and validated settings for one subcommand.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub t_list: Vec<f64>,
    pub lambdas: Option<Vec<f64>>,
    pub grid: usize,
    pub samples: usize,
    pub p_list: Vec<Exponent>,
    pub degrees: Vec<usize>,
    pub radius: f64,
    pub case: Option<String>,
    pub seed: u64,
    /// `None` writes to stdout.
    pub out: Option<PathBuf>,
    pub format: Format,
}

pub const DEFAULT_T: [f64; 4] = [2.0, 3.0, 4.0, 5.0];
pub const DEFAULT_GRID: usize = 64;
pub const DEFAULT_SAMPLES: usize = 200;
pub const DEFAULT_RADIUS: f64 = 1.0;

impl RunConfig {
    pub fn resolve(
        subcommand: Subcommand,
        p: PartialConfig,
        out_dir: Option<PathBuf>,
    ) -> Result<Self, CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        let t_list = p.t_list.unwrap_or_else(|| DEFAULT_T.to_vec());
        if t_list.is_empty() {
            return usage("--T needs at least one horizon".into());
        }
        if let Some(&t) = t_list.iter().find(|&&t| !(t >= 2.0) || !t.is_finite()) {
            return usage(format!(
                "horizon T = {t} is below 2; the window 2 <= phi <= T would be empty"
            ));
        }
        if let Some(ls) = &p.lambdas {
            if ls.is_empty() {
                return usage("--lambda needs at least one frequency".into());
            }
            if let Some(&l) = ls.iter().find(|&&l| !(l >= 8.0) || !l.is_finite()) {
                return usage(format!("frequency lambda = {l} is below 8"));
            }
        }
        let p_list = p.p_list.unwrap_or_else(|| {
            [2.0, 3.0, 4.0, 6.0, 8.0, f64::INFINITY]
                .iter()
                .map(|&x| Exponent(x))
                .collect()
        });
        if let Some(e) = p_list.iter().find(|e| !(e.0 >= 1.0)) {
            return usage(format!("exponent p = {e} is below 1"));
        }
        let degrees = p
            .degrees
            .unwrap_or_else(|| georestrict::sphere::DEFAULT_DEGREES.to_vec());
        if degrees.iter().any(|&n| n == 0) {
            return usage("degrees must be positive".into());
        }
        let fits_degrees = matches!(subcommand, Subcommand::SphereExponents | Subcommand::All);
        if fits_degrees && degrees.len() < georestrict::MIN_FIT_DEGREES {
            return usage(format!(
                "the exponent fit needs at least {} degrees",
                georestrict::MIN_FIT_DEGREES
            ));
        }
        let fits_lambdas = matches!(subcommand, Subcommand::OpnormScaling | Subcommand::All);
        if let Some(ls) = p.lambdas.as_ref().filter(|_| fits_lambdas) {
            if ls.len() < georestrict::MIN_FIT_LAMBDAS {
                return usage(format!(
                    "the scaling fit needs at least {} frequencies",
                    georestrict::MIN_FIT_LAMBDAS
                ));
            }
        }
        let grid = p.grid.unwrap_or(DEFAULT_GRID);
        if grid < 16 {
            return usage(format!("grid = {grid} is below the minimum of 16"));
        }
        let samples = p.samples.unwrap_or(DEFAULT_SAMPLES);
        if samples == 0 {
            return usage("samples must be positive".into());
        }
        let radius = p.radius.unwrap_or(DEFAULT_RADIUS);
        if !(radius > 0.0) || !radius.is_finite() {
            return usage(format!("tube radius R = {radius} must be positive"));
        }
        let out = p.out.map(|o| match &out_dir {
            Some(dir) if o.is_relative() => dir.join(o),
            _ => o,
        });
        let out = out.or_else(|| {
            out_dir.map(|d| {
                d.join(format!(
                    "{}.{}",
                    subcommand.name(),
                    p.format.unwrap_or(Format::Json).extension()
                ))
            })
        });
        let from_ext = out.as_deref().and_then(Format::from_extension);
        let format = match (p.format, from_ext) {
            (Some(f), Some(g)) if f != g => {
                return usage(format!(
                    "format {} conflicts with the output file extension .{}",
                    f.extension(),
                    g.extension()
                ))
            }
            (Some(f), _) => f,
            (None, Some(g)) => g,
            (None, None) => Format::Json,
        };
        Ok(RunConfig {
            subcommand,
            t_list,
            lambdas: p.lambdas,
            grid,
            samples,
            p_list,
            degrees,
            radius,
            case: p.case,
            seed: p.seed.unwrap_or(0),
            out,
            format,
        })
    }

    /// The `--case` value if it is one of `allowed`, else `default`.
    pub fn case_or<'a>(&'a self, allowed: &[&str], default: &'a str) -> Result<&'a str, CliError> {
        match self.case.as_deref() {
            None => Ok(default),
            Some(c) if allowed.contains(&c) => Ok(c),
            Some(c) => Err(CliError::Usage(format!(
                "case {c:?} is not valid for {}; expected one of {}",
                self.subcommand.name(),
                allowed.join(", ")
            ))),
        }
    }
}
