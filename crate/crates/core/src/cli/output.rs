//! Deterministic CSV and JSON table writers.
//!
//! Floats are printed with 17 significant digits, rows in grid order, the
//! schema string and the full effective config as `#` comments — so
//! re-running a command with the same config produces byte-identical
//! files.

use super::config::Config;
use crate::error::Error;
use crate::Result;
use std::io::Write;

/// Schema version string embedded in every output file.
pub const SCHEMA_VERSION: &str = "sptlab-table v1";

/// One table cell.
#[derive(Debug, Clone)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    B(bool),
}

impl Cell {
    pub fn from_usize(v: usize) -> Self {
        Cell::I(v as i64)
    }
}

/// 17 significant digits, exponent form; `nan` for undefined values.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// A result table with fixed columns and grid-ordered rows.
#[derive(Debug, Clone)]
pub struct Table {
    pub command: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Trailing comment lines (summaries like fitted exponents, argmins).
    pub footer: Vec<String>,
}

impl Table {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Self {
            command: command.to_string(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            footer: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width must match columns");
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: &mut W, config: &Config) -> Result<()> {
        writeln!(out, "# schema: {SCHEMA_VERSION} {}", self.command)?;
        for line in config.echo_lines() {
            writeln!(out, "# config: {line}")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let mut first = true;
            for cell in row {
                if !first {
                    write!(out, ",")?;
                }
                first = false;
                match cell {
                    Cell::F(x) => write!(out, "{}", fmt_f64(*x))?,
                    Cell::I(i) => write!(out, "{i}")?,
                    Cell::S(s) => write!(out, "{}", csv_escape(s))?,
                    Cell::B(b) => write!(out, "{b}")?,
                }
            }
            writeln!(out)?;
        }
        for line in &self.footer {
            writeln!(out, "# {line}")?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: &mut W, config: &Config) -> Result<()> {
        use serde_json::{json, Map, Number, Value};
        let mut cfg = Map::new();
        for (k, v) in config.iter() {
            cfg.insert(k.clone(), Value::String(v.clone()));
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    let v = match cell {
                        Cell::F(x) => Number::from_f64(*x).map_or(Value::Null, Value::Number),
                        Cell::I(i) => Value::Number((*i).into()),
                        Cell::S(s) => Value::String(s.clone()),
                        Cell::B(b) => Value::Bool(*b),
                    };
                    obj.insert(name.clone(), v);
                }
                Value::Object(obj)
            })
            .collect();
        let doc = json!({
            "schema": format!("{SCHEMA_VERSION} {}", self.command),
            "config": Value::Object(cfg),
            "columns": self.columns,
            "rows": rows,
            "notes": self.footer,
        });
        serde_json::to_writer_pretty(&mut *out, &doc)
            .map_err(|e| Error::Io(format!("json serialization: {e}")))?;
        writeln!(out)?;
        Ok(())
    }

    /// Write to a path in the requested format.
    pub fn write_file(&self, path: &std::path::Path, format: &str, config: &Config) -> Result<()> {
        let file = std::fs::File::create(path)
            .map_err(|e| Error::Io(format!("cannot create {}: {e}", path.display())))?;
        let mut buf = std::io::BufWriter::new(file);
        match format {
            "csv" => self.write_csv(&mut buf, config),
            "json" => self.write_json(&mut buf, config),
            other => Err(Error::Config(format!("unknown format '{other}' (csv|json)"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_shape() {
        let mut t = Table::new("demo", &["a", "b", "label"]);
        t.push_row(vec![Cell::F(0.25), Cell::I(3), Cell::S("ok".into())]);
        t.footer.push("summary: fine".into());
        let mut cfg = Config::new();
        cfg.set("x", "1");
        let mut buf = Vec::new();
        t.write_csv(&mut buf, &cfg).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# schema: sptlab-table v1 demo\n"));
        assert!(text.contains("# config: x = 1"));
        assert!(text.contains("a,b,label"));
        assert!(text.contains("2.5000000000000000e-1,3,ok"));
        assert!(text.ends_with("# summary: fine\n"));
    }

    #[test]
    fn csv_escapes_commas() {
        assert_eq!(csv_escape("a,b"), "\"a,b\"");
        assert_eq!(csv_escape("plain"), "plain");
    }

    #[test]
    fn nan_prints_as_nan_and_json_null() {
        let mut t = Table::new("demo", &["v"]);
        t.push_row(vec![Cell::F(f64::NAN)]);
        let cfg = Config::new();
        let mut buf = Vec::new();
        t.write_csv(&mut buf, &cfg).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains("nan"));
        let mut buf = Vec::new();
        t.write_json(&mut buf, &cfg).unwrap();
        let doc: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert!(doc["rows"][0]["v"].is_null());
    }
}
