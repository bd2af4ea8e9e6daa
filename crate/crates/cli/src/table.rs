//! Result tables and their CSV/JSON encodings. Floats are written in the
//! shortest form that parses back to the same bits.

use std::path::Path;

use serde_json::Value;

use crate::config::Format;
use crate::error::{CliError, Result};

#[derive(Debug, Clone)]
pub enum Cell {
    Empty,
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Cell::Empty, Cell::Empty) => true,
            (Cell::Num(a), Cell::Num(b)) => a.to_bits() == b.to_bits(),
            (Cell::Int(a), Cell::Int(b)) => a == b,
            (Cell::Bool(a), Cell::Bool(b)) => a == b,
            (Cell::Text(a), Cell::Text(b)) => a == b,
            _ => false,
        }
    }
}

impl Cell {
    pub fn opt(x: Option<f64>) -> Self {
        x.map(Cell::Num).unwrap_or(Cell::Empty)
    }

    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    fn to_field(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Num(x) => format!("{x:?}"),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn from_field(s: &str) -> Self {
        if s.is_empty() {
            return Cell::Empty;
        }
        if s == "true" || s == "false" {
            return Cell::Bool(s == "true");
        }
        let floaty = s.contains(['.', 'e', 'E']) || matches!(s, "inf" | "-inf" | "NaN");
        if floaty {
            if let Ok(x) = s.parse::<f64>() {
                return Cell::Num(x);
            }
        } else if let Ok(i) = s.parse::<i64>() {
            return Cell::Int(i);
        }
        Cell::Text(s.to_string())
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Empty => Value::Null,
            Cell::Num(x) if x.is_finite() => serde_json::Number::from_f64(*x).map(Value::Number).unwrap_or(Value::Null),
            Cell::Num(x) => Value::String(format!("{x:?}")),
            Cell::Int(i) => Value::from(*i),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }

    fn from_json(v: &Value) -> Result<Self> {
        Ok(match v {
            Value::Null => Cell::Empty,
            Value::Bool(b) => Cell::Bool(*b),
            Value::Number(n) if n.is_i64() => Cell::Int(n.as_i64().unwrap_or_default()),
            Value::Number(n) => Cell::Num(n.as_f64().ok_or_else(|| CliError::Config(format!("unrepresentable number {n}")))?),
            Value::String(s) if matches!(s.as_str(), "inf" | "-inf" | "NaN") => Cell::Num(s.parse().unwrap_or(f64::NAN)),
            Value::String(s) => Cell::Text(s.clone()),
            _ => return Err(CliError::Config("table cells must be scalars".into())),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of one column (None for empty or non-numeric cells).
    pub fn values(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.column(name)?;
        Some(self.rows.iter().map(|r| r[k].as_f64()).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_field)).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let columns: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        let mut table = Table::new(columns);
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            table.rows.push(rec.iter().map(Cell::from_field).collect());
        }
        Ok(table)
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::to_json).collect())).collect();
        let doc = serde_json::json!({ "columns": self.columns, "rows": rows });
        let mut s = serde_json::to_string_pretty(&doc).expect("json encoding");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON table: {e}")))?;
        let bad = || CliError::Config("JSON table needs \"columns\" and \"rows\" arrays".into());
        let columns = doc.get("columns").and_then(Value::as_array).ok_or_else(bad)?;
        let columns: Vec<String> = columns.iter().map(|c| c.as_str().map(str::to_string).ok_or_else(bad)).collect::<Result<_>>()?;
        let mut table = Table::new(columns);
        for row in doc.get("rows").and_then(Value::as_array).ok_or_else(bad)? {
            let cells = row.as_array().ok_or_else(bad)?;
            if cells.len() != table.columns.len() {
                return Err(CliError::Config("JSON table row has the wrong number of cells".into()));
            }
            table.rows.push(cells.iter().map(Cell::from_json).collect::<Result<_>>()?);
        }
        Ok(table)
    }

    pub fn encode(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => Ok(self.to_json()),
        }
    }

    pub fn decode(text: &str, format: Format) -> Result<Self> {
        match format {
            Format::Csv => Self::from_csv(text),
            Format::Json => Self::from_json(text),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let format = if text.trim_start().starts_with('{') { Format::Json } else { Format::for_path(path) };
        Self::decode(&text, format)
    }

    pub fn write(&self, path: &Path, format: Format) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.encode(format)?)?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Config(format!("CSV: {e}"))
}
