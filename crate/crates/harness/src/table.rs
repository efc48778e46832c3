//! Versioned sweep tables: CSV (RFC 4180, CRLF line ends) or JSONL.
//!
//! Columns, schema version 1:
//! `schema_version, q, q_float, label, mass_class, status, error,
//! final_increment, upsilon_slope, potential_slope, mass_drift, run_dir`.
//! A diagnostic that was disabled or could not be fitted leaves its cell
//! empty in CSV and `null` in JSONL; it is never written as zero.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde_json::json;

use crate::error::{HarnessError, Result};
use crate::sweep::{SweepReport, SweepRow};

pub const TABLE_SCHEMA_VERSION: u32 = 1;

pub const COLUMNS: [&str; 12] = [
    "schema_version",
    "q",
    "q_float",
    "label",
    "mass_class",
    "status",
    "error",
    "final_increment",
    "upsilon_slope",
    "potential_slope",
    "mass_drift",
    "run_dir",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Jsonl,
}

impl FromStr for TableFormat {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "jsonl" => Ok(TableFormat::Jsonl),
            other => Err(HarnessError::Invalid(format!(
                "unknown table format {other:?} (csv or jsonl)"
            ))),
        }
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn text(v: &Option<String>) -> String {
    v.clone().unwrap_or_default()
}

pub fn write_csv<W: Write>(report: &SweepReport, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out);
    w.write_record(COLUMNS)?;
    for r in &report.rows {
        w.write_record([
            TABLE_SCHEMA_VERSION.to_string(),
            r.q.clone(),
            r.q_float.to_string(),
            text(&r.label),
            text(&r.mass_class),
            r.status.as_str().to_string(),
            text(&r.error),
            cell(r.final_increment),
            cell(r.upsilon_slope),
            cell(r.potential_slope),
            cell(r.mass_drift),
            text(&r.run_dir),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_jsonl<W: Write>(report: &SweepReport, mut out: W) -> Result<()> {
    for r in &report.rows {
        let mut v = serde_json::to_value(r)?;
        v["schema_version"] = json!(TABLE_SCHEMA_VERSION);
        serde_json::to_writer(&mut out, &v)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn export_table(report: &SweepReport, format: TableFormat, path: &Path) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    match format {
        TableFormat::Csv => write_csv(report, file),
        TableFormat::Jsonl => write_jsonl(report, file),
    }
}

fn parse_opt_f64(s: &str, column: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| HarnessError::Invalid(format!("column {column}: {s:?} is not a number")))
}

fn opt_text(s: &str) -> Option<String> {
    (!s.is_empty()).then(|| s.to_string())
}

/// Reads a CSV written by [`write_csv`], checking header and schema version.
pub fn read_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != COLUMNS {
        return Err(HarnessError::Invalid(format!(
            "unexpected header {header:?}"
        )));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let get = |i: usize| rec.get(i).unwrap_or("");
        if get(0) != TABLE_SCHEMA_VERSION.to_string() {
            return Err(HarnessError::Invalid(format!(
                "schema version {:?} is not supported",
                get(0)
            )));
        }
        rows.push(SweepRow {
            q: get(1).to_string(),
            q_float: parse_opt_f64(get(2), "q_float")?.unwrap_or(f64::NAN),
            label: opt_text(get(3)),
            mass_class: opt_text(get(4)),
            status: get(5).parse().map_err(HarnessError::Invalid)?,
            error: opt_text(get(6)),
            final_increment: parse_opt_f64(get(7), "final_increment")?,
            upsilon_slope: parse_opt_f64(get(8), "upsilon_slope")?,
            potential_slope: parse_opt_f64(get(9), "potential_slope")?,
            mass_drift: parse_opt_f64(get(10), "mass_drift")?,
            run_dir: opt_text(get(11)),
        });
    }
    Ok(rows)
}

/// Reads a JSONL table written by [`write_jsonl`].
pub fn read_jsonl(path: &Path) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut v: serde_json::Value = serde_json::from_str(&line)?;
        if v["schema_version"] != json!(TABLE_SCHEMA_VERSION) {
            return Err(HarnessError::Invalid(format!(
                "schema version {} is not supported",
                v["schema_version"]
            )));
        }
        if let Some(obj) = v.as_object_mut() {
            obj.remove("schema_version");
        }
        rows.push(serde_json::from_value(v)?);
    }
    Ok(rows)
}
