//! Report writers: JSON documents, the coverage table CSV and TSV plot data.

use std::fs;
use std::path::{Path, PathBuf};

use forlap::evaluation::{BacktestRun, CoverageReport, RelativeMetrics};
use forlap::forecast::Method;
use forlap::simulation::ModelId;
use serde::Serialize;

use crate::config::RunConfig;
use crate::{CliError, Result};

/// `sign(x) sqrt(|x|)`.
pub fn signed_sqrt(x: f64) -> f64 {
    x.signum() * x.abs().sqrt()
}

/// Record of everything needed to rerun a command.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub rng: &'static str,
    pub config: &'a RunConfig,
}

impl<'a> Manifest<'a> {
    pub fn new(config: &'a RunConfig) -> Self {
        Self {
            tool: "forlap",
            version: env!("CARGO_PKG_VERSION"),
            rng: forlap::simulation::RNG_ALGORITHM,
            config,
        }
    }
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<PathBuf> {
    fs::write(path, text).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    Ok(path.to_path_buf())
}

pub(crate) fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Serialize(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

/// One table row; the baseline row carries no ratios.
#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub model: ModelId,
    pub method: Method,
    pub coverage: Vec<f64>,
    pub relative: Option<RelativeMetrics>,
}

impl TableRow {
    pub fn new(model: ModelId, method: Method, coverage: &CoverageReport, relative: Option<RelativeMetrics>) -> Self {
        Self {
            model,
            method,
            coverage: coverage.coverage.clone(),
            relative,
        }
    }
}

/// `model,method,40,...,90,MCR,MIS`, coverage in percent.
pub fn table_csv(levels: &[f64], rows: &[TableRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["model".to_string(), "method".to_string()];
    header.extend(levels.iter().map(|l| format!("{}", (l * 100.0).round())));
    header.extend(["MCR".to_string(), "MIS".to_string()]);
    let csv_err = |e: csv::Error| CliError::Serialize(e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    for row in rows {
        let mut rec = vec![row.model.to_string(), row.method.to_string()];
        rec.extend(row.coverage.iter().map(|c| format!("{c:.1}")));
        match &row.relative {
            Some(r) => rec.extend([format!("{:.3}", r.mcr), format!("{:.3}", r.mis)]),
            None => rec.extend([String::new(), String::new()]),
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Serialize(e.to_string()))
}

/// Per-origin plot data: raw columns followed by signed-square-root ones.
pub fn plot_tsv(run: &BacktestRun) -> String {
    let pct = |l: f64| format!("{}", (l * 100.0).round());
    let mut raw_cols = vec!["truth".to_string(), "point".to_string()];
    for &l in &run.levels {
        raw_cols.push(format!("lower{}", pct(l)));
        raw_cols.push(format!("upper{}", pct(l)));
    }
    let mut header = vec!["origin".to_string(), "target".to_string()];
    header.extend(raw_cols.iter().cloned());
    header.extend(raw_cols.iter().map(|c| format!("{c}_ssqrt")));
    let mut out = header.join("\t");
    out.push('\n');
    for r in &run.records {
        let mut raw = vec![r.truth, r.point];
        for iv in &r.intervals {
            raw.extend(iv);
        }
        let mut fields = vec![r.origin.to_string(), r.target.to_string()];
        fields.extend(raw.iter().map(|v| v.to_string()));
        fields.extend(raw.iter().map(|&v| signed_sqrt(v).to_string()));
        out.push_str(&fields.join("\t"));
        out.push('\n');
    }
    out
}
