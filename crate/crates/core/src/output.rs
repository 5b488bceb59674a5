//! Writing reports and spectra to disk.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::report::Report;
use crate::scenario::{Outcome, ScenarioError, SCHEMA_VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format {other:?}, expected json or csv")),
        }
    }
}

/// Top-level JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub lambda: f64,
    pub reports: Vec<Report>,
}

impl ReportFile {
    pub fn from_outcome(o: &Outcome) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: o.scenario.clone(),
            seed: o.seed,
            lambda: o.lambda,
            reports: o.reports.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> ScenarioError {
    ScenarioError::Output(format!("{}: {e}", path.display()))
}

/// Report rows as CSV; parameters and metrics are embedded as JSON objects.
pub fn reports_csv(reports: &[Report]) -> Result<String, ScenarioError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "check", "anchor", "status", "pass", "residual", "tolerance", "wall_time_ms", "params",
        "metrics", "boundary", "notes",
    ];
    let fail = |e: csv::Error| ScenarioError::Output(e.to_string());
    w.write_record(header).map_err(fail)?;
    for r in reports {
        let status = serde_json::to_value(r.status).expect("status serializes");
        let boundary: Vec<String> = r.boundary.iter().map(|b| b.to_string()).collect();
        w.write_record([
            r.check.clone(),
            r.anchor.clone(),
            status.as_str().unwrap_or_default().to_string(),
            r.pass.to_string(),
            r.residual.to_string(),
            r.tolerance.to_string(),
            r.wall_time_ms.to_string(),
            serde_json::to_string(&r.params).expect("params serialize"),
            serde_json::to_string(&r.metrics).expect("metrics serialize"),
            boundary.join(" "),
            r.notes.join("; "),
        ])
        .map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| ScenarioError::Output(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// `index,eigenvalue` rows.
pub fn spectrum_csv(eigenvalues: &[f64]) -> String {
    let mut out = String::from("index,eigenvalue\n");
    for (i, e) in eigenvalues.iter().enumerate() {
        out.push_str(&format!("{i},{e}\n"));
    }
    out
}

/// `lambda,count` rows at each distinct eigenvalue.
pub fn counting_csv(eigenvalues: &[f64]) -> String {
    let mut out = String::from("lambda,count\n");
    let mut i = 0;
    while i < eigenvalues.len() {
        let e = eigenvalues[i];
        let mut j = i + 1;
        while j < eigenvalues.len() && eigenvalues[j] == e {
            j += 1;
        }
        out.push_str(&format!("{e},{j}\n"));
        i = j;
    }
    out
}

/// Writes `<scenario>_reports.{json,csv}` plus `<scenario>_<object>_spectrum.csv`
/// and `<scenario>_<object>_counting.csv` for each spectrum; returns the paths.
pub fn write_outcome(dir: &Path, outcome: &Outcome, format: Format) -> Result<Vec<PathBuf>, ScenarioError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<(), ScenarioError> {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| io_err(&path, e))?;
        written.push(path);
        Ok(())
    };
    let name = &outcome.scenario;
    match format {
        Format::Json => put(format!("{name}_reports.json"), ReportFile::from_outcome(outcome).to_json())?,
        Format::Csv => put(format!("{name}_reports.csv"), reports_csv(&outcome.reports)?)?,
    }
    for s in &outcome.spectra {
        put(format!("{name}_{}_spectrum.csv", s.object), spectrum_csv(&s.eigenvalues))?;
        put(format!("{name}_{}_counting.csv", s.object), counting_csv(&s.eigenvalues))?;
    }
    Ok(written)
}
