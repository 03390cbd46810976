//! CSV and JSON writers for command results.
//!
//! CSV: header row, numbers as `{:.16e}` (17 significant digits), infinite
//! values as `inf`. JSON: an array of row objects with keys in column order;
//! non-finite numbers become the strings "inf", "-inf", "nan".

use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde_json::{Map, Number, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) if v.is_nan() => "nan".into(),
            Cell::Num(v) if v.is_infinite() => if *v > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => match Number::from_f64(*v) {
                Some(n) => Value::Number(n),
                None => Value::String(Cell::Num(*v).csv()),
            },
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
        }
    }

    #[cfg(test)]
    fn from_json(value: &Value) -> Option<Self> {
        Some(match value {
            Value::Number(n) => Cell::Num(n.as_f64()?),
            Value::Bool(b) => Cell::Bool(*b),
            Value::String(s) => match s.as_str() {
                "inf" => Cell::Num(f64::INFINITY),
                "-inf" => Cell::Num(f64::NEG_INFINITY),
                "nan" => Cell::Num(f64::NAN),
                _ => Cell::Text(s.clone()),
            },
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Output {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        writer.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(Cell::csv)).map_err(io)?;
        }
        writer.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn to_json(&self) -> Result<Vec<u8>, CliError> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let object: Map<String, Value> = self
                    .columns
                    .iter()
                    .cloned()
                    .zip(row.iter().map(Cell::json))
                    .collect();
                Value::Object(object)
            })
            .collect();
        let mut bytes =
            serde_json::to_vec_pretty(&rows).map_err(|e| CliError::Io(e.to_string()))?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    /// Parses JSON written by [`Output::to_json`].
    #[cfg(test)]
    pub fn from_json(bytes: &[u8]) -> Result<Self, CliError> {
        let bad = |msg: &str| CliError::Io(format!("malformed table JSON: {msg}"));
        let rows: Vec<Map<String, Value>> =
            serde_json::from_slice(bytes).map_err(|e| CliError::Io(e.to_string()))?;
        let columns: Vec<String> = rows
            .first()
            .map(|r| r.keys().cloned().collect())
            .unwrap_or_default();
        let mut out = Output {
            columns,
            rows: Vec::new(),
        };
        for row in &rows {
            if row.keys().ne(out.columns.iter()) {
                return Err(bad("rows have different keys"));
            }
            let cells: Option<Vec<Cell>> = row.values().map(Cell::from_json).collect();
            out.rows
                .push(cells.ok_or_else(|| bad("unsupported value"))?);
        }
        Ok(out)
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Writes to `path`, or stdout when `None`.
    pub fn emit(&self, format: Format, path: Option<&Path>) -> Result<(), CliError> {
        let bytes = self.render(format)?;
        let io = |e: std::io::Error| CliError::Io(e.to_string());
        match path {
            Some(p) => std::fs::write(p, bytes).map_err(io),
            None => match std::io::stdout().lock().write_all(&bytes) {
                // reader went away (e.g. piped into `head`)
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                other => other.map_err(io),
            },
        }
    }
}
