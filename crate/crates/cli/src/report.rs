use std::io::Write;
use std::path::Path;

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::config::{Exponent, Format, RunConfig};
use crate::CliError;

/// Floats print with 17 significant digits; non-finite values become `null`.
fn sci_text(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn sci<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    RawValue::from_string(sci_text(*x))
        .map_err(serde::ser::Error::custom)?
        .serialize(s)
}

fn sci_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    sci(&x.unwrap_or(f64::NAN), s)
}

fn sci_vec<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let raw: Vec<Box<RawValue>> = xs
        .iter()
        .map(|&x| RawValue::from_string(sci_text(x)))
        .collect::<Result<_, _>>()
        .map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

/// One checked (or measured) quantity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub suite: String,
    pub name: String,
    /// What the record checks, e.g. `inf |phi_st| >= e^{-11T}`.
    pub reference: String,
    #[serde(serialize_with = "sci")]
    pub value: f64,
    /// Bound or target the value is compared with; `None` for plain
    /// measurements.
    #[serde(serialize_with = "sci_opt")]
    pub bound: Option<f64>,
    pub pass: bool,
}

impl Record {
    pub fn check(
        suite: &str,
        name: impl Into<String>,
        reference: impl Into<String>,
        value: f64,
        bound: f64,
        pass: bool,
    ) -> Self {
        Self {
            suite: suite.to_string(),
            name: name.into(),
            reference: reference.into(),
            value,
            bound: Some(bound),
            pass,
        }
    }

    pub fn measurement(
        suite: &str,
        name: impl Into<String>,
        reference: impl Into<String>,
        value: f64,
    ) -> Self {
        Self {
            suite: suite.to_string(),
            name: name.into(),
            reference: reference.into(),
            value,
            bound: None,
            pass: value.is_finite(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub subcommand: &'static str,
    #[serde(rename = "T", serialize_with = "sci_vec")]
    pub t_list: Vec<f64>,
    #[serde(serialize_with = "sci_vec")]
    pub lambdas: Vec<f64>,
    pub grid: usize,
    pub samples: usize,
    pub p: Vec<String>,
    pub degrees: Vec<usize>,
    #[serde(serialize_with = "sci")]
    pub radius: f64,
    pub case: Option<String>,
    pub seed: u64,
    pub format: Format,
}

impl ConfigEcho {
    pub fn new(cfg: &RunConfig) -> Self {
        Self {
            subcommand: cfg.subcommand.name(),
            t_list: cfg.t_list.clone(),
            lambdas: cfg.lambdas.clone().unwrap_or_default(),
            grid: cfg.grid,
            samples: cfg.samples,
            p: cfg.p_list.iter().map(Exponent::to_string).collect(),
            degrees: cfg.degrees.clone(),
            radius: cfg.radius,
            case: cfg.case.clone(),
            seed: cfg.seed,
            format: cfg.format,
        }
    }
}

/// Reports carry no wall-clock data, so equal configs give equal bytes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: String,
    pub config: ConfigEcho,
    pub pass: bool,
    pub records: Vec<Record>,
}

impl Report {
    pub fn new(cfg: &RunConfig, records: Vec<Record>) -> Self {
        Self {
            tool: "georestrict",
            version: format!("v{}", env!("CARGO_PKG_VERSION")),
            config: ConfigEcho::new(cfg),
            pass: records.iter().all(|r| r.pass),
            records,
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s =
            serde_json::to_string_pretty(self).map_err(|e| CliError::Usage(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Header plus one row per record.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("suite,name,reference,value,bound,pass\n");
        for r in &self.records {
            let bound = r.bound.map(sci_text).unwrap_or_default();
            let value = if r.value.is_finite() {
                sci_text(r.value)
            } else {
                String::new()
            };
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                csv_field(&r.suite),
                csv_field(&r.name),
                csv_field(&r.reference),
                value,
                bound.replace("null", ""),
                r.pass
            ));
        }
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_report(report: &Report, path: Option<&Path>, format: Format) -> Result<(), CliError> {
    let text = match format {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv(),
    };
    match path {
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io {
                path: "<stdout>".into(),
                source: e,
            }),
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
                    path: dir.to_path_buf(),
                    source: e,
                })?;
            }
            std::fs::write(p, text).map_err(|e| CliError::Io {
                path: p.to_path_buf(),
                source: e,
            })
        }
    }
}
