//! Tabular output: CSV and JSON renderers over one row model, plus
//! atomic file emission (write to a temp file, then rename into place, so a
//! failed run never leaves a truncated artifact behind).

use std::io::{self, Write};
use std::path::Path;

use tempfile::NamedTempFile;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    MaybeFloat(Option<f64>),
    Bool(bool),
    MaybeBool(Option<bool>),
    Str(String),
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Full round-trip precision so downstream consumers never re-round.
fn float_csv(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn float_json(v: f64) -> String {
    if v.is_finite() {
        serde_json::Value::from(v).to_string()
    } else if v > 0.0 {
        "\"inf\"".to_string()
    } else {
        "\"-inf\"".to_string()
    }
}

pub fn render_csv(table: &Table) -> String {
    let mut out = String::new();
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row
            .iter()
            .map(|cell| match cell {
                Cell::Int(v) => v.to_string(),
                Cell::Float(v) => float_csv(*v),
                Cell::MaybeFloat(Some(v)) => float_csv(*v),
                Cell::MaybeFloat(None) => String::new(),
                Cell::Bool(v) => v.to_string(),
                Cell::MaybeBool(Some(v)) => v.to_string(),
                Cell::MaybeBool(None) => String::new(),
                Cell::Str(v) => v.clone(),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// One JSON object per row, keys in column order, one row per line.
pub fn render_json(table: &Table) -> String {
    let mut out = String::from("[\n");
    for (i, row) in table.rows.iter().enumerate() {
        out.push_str("  {");
        for (j, (name, cell)) in table.columns.iter().zip(row).enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            out.push_str(&serde_json::Value::from(*name).to_string());
            out.push_str(": ");
            let value = match cell {
                Cell::Int(v) => v.to_string(),
                Cell::Float(v) => float_json(*v),
                Cell::MaybeFloat(Some(v)) => float_json(*v),
                Cell::MaybeFloat(None) => "null".to_string(),
                Cell::Bool(v) => v.to_string(),
                Cell::MaybeBool(Some(v)) => v.to_string(),
                Cell::MaybeBool(None) => "null".to_string(),
                Cell::Str(v) => serde_json::Value::from(v.as_str()).to_string(),
            };
            out.push_str(&value);
        }
        out.push('}');
        out.push_str(if i + 1 < table.rows.len() {
            ",\n"
        } else {
            "\n"
        });
    }
    out.push_str("]\n");
    out
}

/// Writes `text` to `path`, or to stdout when no path is given. File writes
/// go through a sibling temp file and an atomic rename.
pub fn emit(text: &str, path: Option<&Path>) -> io::Result<()> {
    match path {
        None => io::stdout().write_all(text.as_bytes()),
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = NamedTempFile::new_in(dir)?;
            tmp.write_all(text.as_bytes())?;
            tmp.persist(path).map_err(|e| e.error)?;
            Ok(())
        }
    }
}
