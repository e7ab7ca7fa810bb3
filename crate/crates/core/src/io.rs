//! Text formats for trajectories, run reports and tables.
//!
//! CSV files look like
//!
//! ```text
//! # key=value key=value ...
//! t,value
//! 0,1
//! ...
//! ```
//!
//! and JSON files carry the same three parts as `{"meta", "header", "rows"}`.
//! [`DataFile::parse`] reads either back.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::analysis::Trajectory;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Version string written into every file.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

kebab_enum_text!(Format { Csv => "csv", Json => "json" });

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Shortest round-trip text for a number; exponent form outside `[1e-4, 1e15)`.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Metadata, column names and string cells of one file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DataFile {
    pub meta: BTreeMap<String, String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn check_meta_token(s: &str, what: &str) -> Result<()> {
    if s.is_empty() || s.chars().any(|c| c.is_whitespace() || c == '=' || c == '#') {
        return Err(Error::InvalidParameter(format!("metadata {what} '{s}' must be non-empty without spaces, '=' or '#'")));
    }
    Ok(())
}

impl DataFile {
    pub fn new(meta: BTreeMap<String, String>, header: &[&str]) -> Self {
        Self { meta, header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push_row(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::InvalidParameter(format!(
                "row has {} cells, header has {}",
                row.len(),
                self.header.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Index of a named column.
    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("missing column '{name}'")))
    }

    pub fn trajectory<T: Real>(meta: BTreeMap<String, String>, traj: &Trajectory<T>) -> Result<Self> {
        let mut file = Self::new(meta, &["t", "value"]);
        file.meta.insert("label".into(), traj.label.clone());
        for (t, x) in traj.iter() {
            file.push_row(vec![format_number(t.as_f64()), format_number(x.as_f64())])?;
        }
        Ok(file)
    }

    pub fn to_trajectory(&self) -> Result<Trajectory<f64>> {
        let (it, ix) = (self.column("t")?, self.column("value")?);
        let mut times = Vec::with_capacity(self.rows.len());
        let mut values = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            times.push(parse_cell(&row[it])?);
            values.push(parse_cell(&row[ix])?);
        }
        let label = self.meta.get("label").cloned().unwrap_or_default();
        Trajectory::new(label, times, values).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::from("#");
        for (k, v) in &self.meta {
            check_meta_token(k, "key")?;
            check_meta_token(v, "value")?;
            out.push(' ');
            out.push_str(k);
            out.push('=');
            out.push_str(v);
        }
        out.push('\n');
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            if row.iter().any(|c| c.contains(',') || c.contains('\n')) {
                return Err(Error::InvalidParameter(format!("cell with ',' or newline in {row:?}")));
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(|c| cell_to_json(c)).collect()))
            .collect();
        let doc = json!({ "meta": self.meta, "header": self.header, "rows": rows });
        let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Parses either format; JSON is recognised by a leading `{`.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text)
        } else {
            Self::parse_csv(text)
        }
    }

    fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let meta_line = lines.next().ok_or_else(|| Error::Parse("empty file".into()))?;
        let body = meta_line
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse("first line must be '#' metadata".into()))?;
        let mut meta = BTreeMap::new();
        for tok in body.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| Error::Parse(format!("bad metadata token '{tok}'")))?;
            meta.insert(k.to_string(), v.to_string());
        }
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::Parse("missing column header".into()))?
            .split(',')
            .map(str::to_string)
            .collect();
        let mut file = Self { meta, header, rows: Vec::new() };
        for (i, line) in lines.enumerate() {
            let row: Vec<String> = line.split(',').map(str::to_string).collect();
            file.push_row(row).map_err(|e| Error::Parse(format!("data line {}: {e}", i + 1)))?;
        }
        Ok(file)
    }

    fn parse_json(text: &str) -> Result<Self> {
        let doc: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let bad = |what: &str| Error::Parse(format!("JSON field '{what}' missing or malformed"));
        let meta = doc["meta"]
            .as_object()
            .ok_or_else(|| bad("meta"))?
            .iter()
            .map(|(k, v)| v.as_str().map(|s| (k.clone(), s.to_string())).ok_or_else(|| bad("meta")))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let header = doc["header"]
            .as_array()
            .ok_or_else(|| bad("header"))?
            .iter()
            .map(|h| h.as_str().map(str::to_string).ok_or_else(|| bad("header")))
            .collect::<Result<Vec<_>>>()?;
        let mut file = Self { meta, header, rows: Vec::new() };
        for row in doc["rows"].as_array().ok_or_else(|| bad("rows"))? {
            let cells = row
                .as_array()
                .ok_or_else(|| bad("rows"))?
                .iter()
                .map(json_to_cell)
                .collect::<Result<Vec<_>>>()?;
            file.push_row(cells).map_err(|e| Error::Parse(e.to_string()))?;
        }
        Ok(file)
    }

    /// Writes to `path` through a temporary file in the same directory.
    pub fn write_atomic(&self, path: &Path, format: Format) -> Result<()> {
        let text = self.render(format)?;
        write_atomic(path, text.as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let name = path.file_name().ok_or_else(|| Error::InvalidParameter(format!("not a file path: {}", path.display())))?;
    let mut tmp = PathBuf::from(path);
    tmp.set_file_name(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp).map_err(io_err)?;
        f.write_all(bytes).map_err(io_err)?;
        f.sync_all().map_err(io_err)?;
    }
    fs::rename(&tmp, path).map_err(io_err)
}

/// Parses a numeric cell; empty cells are NaN.
pub fn parse_cell(s: &str) -> Result<f64> {
    if s.is_empty() {
        return Ok(f64::NAN);
    }
    s.parse().map_err(|_| Error::Parse(format!("not a number: '{s}'")))
}

fn cell_to_json(c: &str) -> Value {
    if c.is_empty() {
        return Value::Null;
    }
    if c == "true" || c == "false" {
        return Value::Bool(c == "true");
    }
    match c.parse::<f64>() {
        Ok(x) if x.is_finite() && format_number(x) == c => json!(x),
        _ => Value::String(c.to_string()),
    }
}

fn json_to_cell(v: &Value) -> Result<String> {
    Ok(match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => format_number(n.as_f64().ok_or_else(|| Error::Parse(format!("bad number {n}")))?),
        Value::String(s) => s.clone(),
        other => return Err(Error::Parse(format!("unexpected JSON cell {other}"))),
    })
}
