//! CSV / JSON-lines writers and the metadata sidecar.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::experiments::{Diagnostics, SweepResult};
use crate::{Error, Result};

/// Output encoding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

/// Flat `quantity, value, unit` listing for scalar results.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Table {
    pub rows: Vec<Row>,
    pub metadata: serde_json::Value,
    pub diagnostics: Option<Diagnostics>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub quantity: String,
    pub value: f64,
    pub unit: String,
}

impl Table {
    pub fn push(&mut self, quantity: &str, value: f64, unit: &str) {
        self.rows.push(Row {
            quantity: quantity.into(),
            value,
            unit: unit.into(),
        });
    }

    pub fn get(&self, quantity: &str, unit: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.quantity == quantity && r.unit == unit)
            .map(|r| r.value)
    }
}

/// What an experiment produced.
#[derive(Clone, Debug)]
pub enum Outcome {
    Sweep(SweepResult),
    Table(Table),
}

impl Outcome {
    pub fn metadata(&self) -> &serde_json::Value {
        match self {
            Outcome::Sweep(s) => &s.metadata,
            Outcome::Table(t) => &t.metadata,
        }
    }

    pub fn diagnostics(&self) -> Option<&Diagnostics> {
        match self {
            Outcome::Sweep(s) => Some(&s.diagnostics),
            Outcome::Table(t) => t.diagnostics.as_ref(),
        }
    }
}

/// Twelve significant digits in scientific notation.
pub fn number(x: f64) -> String {
    format!("{x:.11e}")
}

fn json_number(x: f64) -> String {
    if x.is_finite() {
        number(x)
    } else {
        "null".into()
    }
}

fn json_string(s: &str) -> String {
    serde_json::Value::String(s.into()).to_string()
}

/// Encodes a sweep: the axis first, then every series in order.
pub fn render_series(result: &SweepResult, format: Format) -> Result<String> {
    if result.is_empty() || result.series.is_empty() {
        return Err(Error::InvalidArgument("refusing to write an empty result".into()));
    }
    let mut out = String::new();
    let names: Vec<&str> = std::iter::once(result.axis_name.as_str())
        .chain(result.series.iter().map(|s| s.name.as_str()))
        .collect();
    let row = |i: usize| std::iter::once(result.axis[i]).chain(result.series.iter().map(move |s| s.values[i]));
    match format {
        Format::Csv => {
            out.push_str(&names.join(","));
            out.push('\n');
            for i in 0..result.len() {
                let cells: Vec<String> = row(i).map(number).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        Format::Jsonl => {
            for i in 0..result.len() {
                let fields: Vec<String> = names
                    .iter()
                    .zip(row(i))
                    .map(|(k, v)| format!("{}:{}", json_string(k), json_number(v)))
                    .collect();
                let _ = writeln!(out, "{{{}}}", fields.join(","));
            }
        }
    }
    Ok(out)
}

pub fn render_table(table: &Table, format: Format) -> Result<String> {
    if table.rows.is_empty() {
        return Err(Error::InvalidArgument("refusing to write an empty table".into()));
    }
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str("quantity,value,unit\n");
            for r in &table.rows {
                let _ = writeln!(out, "{},{},{}", r.quantity, number(r.value), r.unit);
            }
        }
        Format::Jsonl => {
            for r in &table.rows {
                let _ = writeln!(
                    out,
                    "{{\"quantity\":{},\"value\":{},\"unit\":{}}}",
                    json_string(&r.quantity),
                    json_number(r.value),
                    json_string(&r.unit)
                );
            }
        }
    }
    Ok(out)
}

pub fn render(outcome: &Outcome, format: Format) -> Result<String> {
    match outcome {
        Outcome::Sweep(s) => render_series(s, format),
        Outcome::Table(t) => render_table(t, format),
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes a sweep to `path`.
pub fn emit_series(result: &SweepResult, format: Format, path: &Path) -> Result<()> {
    write(path, &render_series(result, format)?)
}

/// Writes any outcome to `path`.
pub fn emit(outcome: &Outcome, format: Format, path: &Path) -> Result<()> {
    write(path, &render(outcome, format)?)
}

/// `<out>.meta.json` next to the data file.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    out.with_file_name(name)
}

pub fn write_sidecar(out: &Path, meta: &serde_json::Value) -> Result<PathBuf> {
    let path = sidecar_path(out);
    let text = serde_json::to_string_pretty(meta).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    write(&path, &(text + "\n"))?;
    Ok(path)
}
