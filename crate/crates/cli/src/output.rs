//! CSV tables and JSON provenance sidecars.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};

use crate::error::CliError;

/// Five significant digits, two-digit signed exponent: `7.1360e-08`.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.4e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let e: i32 = exp.parse().expect("integer exponent");
    let sign = if e < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", e.abs())
}

/// Empty field for an absent value.
pub fn opt_sci(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Writes `<dir>/<stem>.csv` and `<dir>/<stem>.json`; returns both paths.
pub fn write_artifacts(dir: &Path, stem: &str, table: &Table, meta: Value) -> Result<(PathBuf, PathBuf), CliError> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    let json_path = dir.join(format!("{stem}.json"));
    let generated = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let doc = json!({
        "tool": "tempfrac",
        "version": env!("CARGO_PKG_VERSION"),
        "generated_unix": generated,
        "csv": csv_path.file_name().and_then(|s| s.to_str()),
        "columns": table.header,
        "provenance": meta,
    });
    std::fs::write(&json_path, serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok((csv_path, json_path))
}
