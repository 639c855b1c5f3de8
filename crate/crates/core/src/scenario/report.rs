//! Report records and their JSON, CSV and text renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::Expect;
use crate::{Error, Result};

pub const REPORT_SCHEMA: &str = "twistorlab.report/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    pub expect: Expect,
    /// Effective bound, tolerance scale included.
    pub bound: f64,
    pub passed: bool,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    pub min: Option<f64>,
    /// Chart point of the worst sample: largest value for small checks, smallest for large ones.
    pub witness: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
    pub error: Option<String>,
    pub details: BTreeMap<String, Value>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub scenario: String,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub s: f64,
    pub t: f64,
    pub tolerance_scale: f64,
    pub checks: Vec<CheckRecord>,
    pub summary: SuiteSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    /// Drops every timing field, leaving the deterministic body.
    pub fn without_timing(mut self) -> Self {
        self.elapsed_ms = None;
        for c in &mut self.checks {
            c.elapsed_ms = None;
        }
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// Renders a report; `format` is one of `json`, `csv`, `text`.
pub fn emit_report(report: &Report, format: &str) -> Result<Vec<u8>> {
    emit(report, format.parse()?)
}

pub fn emit(report: &Report, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(report)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => to_csv(report),
        Format::Text => Ok(to_text(report).into_bytes()),
    }
}

/// One flattened CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub scenario: String,
    pub id: String,
    pub expect: Expect,
    pub passed: bool,
    pub bound: f64,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    pub min: Option<f64>,
    /// Coordinates joined by `;`.
    pub witness: String,
    pub elapsed_ms: Option<f64>,
    pub error: String,
}

fn to_csv(report: &Report) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in &report.checks {
        w.serialize(CsvRow {
            scenario: report.scenario.clone(),
            id: c.id.clone(),
            expect: c.expect,
            passed: c.passed,
            bound: c.bound,
            max: c.max,
            mean: c.mean,
            min: c.min,
            witness: c
                .witness
                .as_ref()
                .map(|p| p.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(";"))
                .unwrap_or_default(),
            elapsed_ms: c.elapsed_ms,
            error: c.error.clone().unwrap_or_default(),
        })?;
    }
    if report.checks.is_empty() {
        // header only
        w.write_record([
            "scenario", "id", "expect", "passed", "bound", "max", "mean", "min", "witness", "elapsed_ms", "error",
        ])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Parses CSV produced by [`emit`].
pub fn parse_csv(bytes: &[u8]) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(bytes);
    Ok(r.deserialize().collect::<std::result::Result<Vec<CsvRow>, _>>()?)
}

fn num(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.3e}"))
}

fn to_text(report: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "scenario {} (n = {}, {} samples, seed {}, s = {}, t = {})",
        report.scenario, report.n, report.samples, report.seed, report.s, report.t
    );
    if report.tolerance_scale != 1.0 {
        let _ = writeln!(s, "tolerance scale {}", report.tolerance_scale);
    }
    let width = report.checks.iter().map(|c| c.id.len()).max().unwrap_or(0);
    for c in &report.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        let (rel, key) = match c.expect {
            Expect::Small => ("<=", num(c.max)),
            Expect::Large => (">=", num(c.min)),
            Expect::Report => ("~", num(c.max)),
        };
        let _ = write!(
            s,
            "{status}  {:width$}  {:5}  {key} {rel} {:.1e}  (max {}, mean {})",
            c.id,
            format!("{:?}", c.expect).to_lowercase(),
            c.bound,
            num(c.max),
            num(c.mean),
        );
        if let Some(ms) = c.elapsed_ms {
            let _ = write!(s, "  {ms:.1} ms");
        }
        if let Some(e) = &c.error {
            let _ = write!(s, "  error: {e}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "{}/{} checks passed", report.summary.passed, report.summary.total);
    s
}
