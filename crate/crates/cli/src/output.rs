use crate::Format;
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};
use surfremap::{Error, Result};

/// Version of the record and sidecar layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub enum Cell {
    Int(usize),
    Real(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Real)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => v.to_string(),
            Cell::Bool(v) => (*v as u8).to_string(),
            Cell::Text(v) => v.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Real(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Text(v) => json!(v),
            Cell::Empty => Value::Null,
        }
    }
}

pub struct Table {
    headers: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Table { headers: headers.to_vec(), rows: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.headers.len());
        self.rows.push(cells);
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut s = self.headers.join(",");
                s.push('\n');
                for r in &self.rows {
                    s.push_str(&r.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let records: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| Value::Object(self.headers.iter().map(|h| h.to_string()).zip(r.iter().map(Cell::json)).collect()))
                    .collect();
                let mut s = serde_json::to_string_pretty(&records).expect("records serialize");
                s.push('\n');
                s
            }
        }
    }
}

/// Where records go: a file with a `.meta.json` sidecar, or stdout.
pub struct Sink {
    out: Option<PathBuf>,
    format: Format,
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

impl Sink {
    pub fn new(out: Option<PathBuf>, format: Format) -> Self {
        Sink { out, format }
    }

    fn ext(&self) -> &'static str {
        match self.format {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    /// `<out without extension>.<suffix>` with `.meta.json` sidecars and
    /// auxiliary tables placed next to the main output.
    fn sibling(&self, suffix: &str) -> Option<PathBuf> {
        let out = self.out.as_ref()?;
        let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Some(out.with_file_name(format!("{stem}.{suffix}")))
    }

    pub fn write(&self, table: &Table, meta: &Value) -> Result<()> {
        let text = table.render(self.format);
        match &self.out {
            None => std::io::stdout().write_all(text.as_bytes()).map_err(io),
            Some(path) => {
                write_file(path, &text)?;
                let mut meta = meta.clone();
                meta["records"] = json!(table.rows.len());
                meta["columns"] = json!(table.headers);
                let mut m = serde_json::to_string_pretty(&meta).map_err(|e| Error::Parse(e.to_string()))?;
                m.push('\n');
                write_file(&self.sibling("meta.json").expect("output path set"), &m)
            }
        }
    }

    /// Extra table (e.g. per-element values or traces). Skipped when
    /// records go to stdout.
    pub fn write_aux(&self, name: &str, table: &Table) -> Result<()> {
        match self.sibling(&format!("{name}.{}", self.ext())) {
            Some(path) => write_file(&path, &table.render(self.format)),
            None => Ok(()),
        }
    }
}
