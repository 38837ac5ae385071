//! CSV / JSON writers. Numbers are written as `{:.16e}` so a re-run with the
//! same config reproduces every file byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::compute::{Cell, Table};
use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

fn format_num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_csv(table: &Table) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|c| match c {
            Cell::Num(v) => format_num(*v),
            Cell::Text(t) => t.clone(),
        }))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// `{"columns": [...], "rows": [[...]]}`. Non-finite numbers become `null`.
pub fn to_json(table: &Table) -> Result<Vec<u8>, CliError> {
    let rows: Vec<Vec<Value>> = table
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| match c {
                    Cell::Num(v) if v.is_finite() => {
                        // Round-trip through the fixed text form so JSON and CSV agree.
                        Value::from(format_num(*v).parse::<f64>().expect("formatted float"))
                    }
                    Cell::Num(_) => Value::Null,
                    Cell::Text(t) => Value::from(t.as_str()),
                })
                .collect()
        })
        .collect();
    let mut out = serde_json::to_vec_pretty(&json!({ "columns": table.columns, "rows": rows }))?;
    out.push(b'\n');
    Ok(out)
}

pub fn write_tables(
    dir: &Path,
    tables: &[Table],
    format: Format,
) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    tables
        .iter()
        .map(|t| {
            let path = dir.join(format!("{}.{}", t.name, format.extension()));
            let bytes = match format {
                Format::Csv => to_csv(t)?,
                Format::Json => to_json(t)?,
            };
            fs::write(&path, bytes)?;
            Ok(path)
        })
        .collect()
}

#[derive(Serialize)]
struct Sidecar<'a, E: Serialize> {
    tool: &'static str,
    version: &'static str,
    core_version: &'static str,
    command: &'a str,
    files: Vec<String>,
    extra: E,
    config: &'a RunConfig,
}

/// Writes `metadata.json` next to the tables: resolved config and versions.
pub fn write_sidecar<E: Serialize>(
    dir: &Path,
    command: &str,
    config: &RunConfig,
    files: &[PathBuf],
    extra: E,
) -> Result<PathBuf, CliError> {
    let sidecar = Sidecar {
        tool: "ndweak",
        version: env!("CARGO_PKG_VERSION"),
        core_version: ndweak_core::VERSION,
        command,
        files: files
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
        extra,
        config,
    };
    let path = dir.join("metadata.json");
    let mut bytes = serde_json::to_vec_pretty(&sidecar)?;
    bytes.push(b'\n');
    fs::write(&path, bytes)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Table {
        Table {
            name: "t".into(),
            columns: vec!["k".into(), "Q_exact".into()],
            rows: vec![
                vec![Cell::Num(-1.0), Cell::Num(0.1)],
                vec![Cell::Num(0.0), Cell::Num(f64::NAN)],
            ],
        }
    }

    #[test]
    fn csv_layout() {
        let text = String::from_utf8(to_csv(&table()).unwrap()).unwrap();
        assert_eq!(
            text,
            "k,Q_exact\n-1.0000000000000000e0,1.0000000000000001e-1\n0.0000000000000000e0,NaN\n"
        );
        assert!(!text.contains('\r'));
    }

    #[test]
    fn json_layout() {
        let v: Value = serde_json::from_slice(&to_json(&table()).unwrap()).unwrap();
        assert_eq!(v["columns"][1], "Q_exact");
        assert_eq!(v["rows"][0][1], 0.1);
        assert!(v["rows"][1][1].is_null());
    }
}
