//! Reports and their CSV/JSON encodings.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use selfsim_core::check::CheckRow;

use crate::error::CliError;

/// Column order of the row CSV.
pub const COLUMNS: [&str; 7] = ["check_name", "parameter", "theoretical", "empirical", "band_low", "band_high", "pass"];

/// One verdict line. Open band edges are stored as `+-f64::MAX` so the JSON
/// encoding stays finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub check_name: String,
    pub parameter: String,
    pub theoretical: Option<f64>,
    pub empirical: f64,
    pub band_low: f64,
    pub band_high: f64,
    pub pass: bool,
}

fn finite(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(-f64::MAX, f64::MAX)
    }
}

impl From<CheckRow> for Row {
    fn from(r: CheckRow) -> Self {
        let pass = r.pass && r.empirical.is_finite();
        Self {
            check_name: r.check,
            parameter: r.parameter,
            theoretical: r.theoretical.map(finite),
            empirical: finite(r.empirical),
            band_low: finite(r.band_low),
            band_high: finite(r.band_high),
            pass,
        }
    }
}

/// Auxiliary output such as a sampled path or a density on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub command: String,
    pub config: serde_json::Value,
    /// SHA-256 of the canonical JSON of `{command, params, seed}`.
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub workers: usize,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<Row>,
    pub tables: Vec<Table>,
    pub metadata: Metadata,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Shortest round-tripping decimal.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

impl Report {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn rows_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(COLUMNS).map_err(csv_err)?;
        for r in &self.rows {
            let theo = r.theoretical.map(num).unwrap_or_default();
            w.write_record([
                r.check_name.clone(),
                r.parameter.clone(),
                theo,
                num(r.empirical),
                num(r.band_low),
                num(r.band_high),
                r.pass.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn table_csv(table: &Table) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&table.columns).map_err(csv_err)?;
        for r in &table.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn to_json(&self) -> Result<Vec<u8>, CliError> {
        let mut v = serde_json::to_vec_pretty(self).map_err(|e| CliError::Io(e.to_string()))?;
        v.push(b'\n');
        Ok(v)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, CliError> {
        serde_json::from_slice(bytes).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Sibling path `<stem>.<name>.csv` for an auxiliary table.
pub fn table_path(out: &Path, name: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    out.with_file_name(format!("{stem}.{name}.csv"))
}

/// Write the report to `out`, or to stdout when `out` is `None`.
///
/// CSV output puts the rows in `out` and each table in a sibling file; on
/// stdout tables are skipped. JSON carries everything in one document.
pub fn emit(report: &Report, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let body = match format {
        Format::Csv => report.rows_csv()?,
        Format::Json => report.to_json()?,
    };
    match out {
        Some(path) => {
            std::fs::write(path, &body)?;
            if format == Format::Csv {
                for t in &report.tables {
                    std::fs::write(table_path(path, &t.name), Report::table_csv(t)?)?;
                }
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&body)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(rows: Vec<Row>) -> Report {
        Report {
            rows,
            tables: vec![],
            metadata: Metadata {
                command: "x".into(),
                config: serde_json::json!({}),
                config_hash: String::new(),
                seed: 0,
                version: "0".into(),
                workers: 1,
                wall_time_ms: 0,
            },
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let csv = report(vec![]).rows_csv().unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), format!("{}\n", COLUMNS.join(",")));
    }

    #[test]
    fn open_bands_stay_finite() {
        let row: Row = CheckRow::banded("c", "p", None, 1.0, f64::NEG_INFINITY, f64::INFINITY).into();
        assert_eq!(row.band_high, f64::MAX);
        let r = report(vec![row]);
        assert_eq!(Report::from_json(&r.to_json().unwrap()).unwrap(), r);
    }
}
