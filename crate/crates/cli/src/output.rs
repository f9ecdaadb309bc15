//! Output envelope and its CSV / JSON renderings.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            Cell::Num(x) => push_float(out, *x),
            Cell::Int(n) => write!(out, "{n}").unwrap(),
            Cell::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Cell::Text(s) => out.push_str(s),
            Cell::Empty => {}
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// 17 significant digits, locale-free.
fn push_float(out: &mut String, x: f64) {
    if x.is_nan() {
        out.push_str("nan");
    } else if x.is_infinite() {
        out.push_str(if x > 0.0 { "inf" } else { "-inf" });
    } else {
        write!(out, "{x:.16e}").unwrap();
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Long `quantity,index,value` table for record-shaped payloads.
    pub fn records() -> Self {
        Self::new(&["quantity", "index", "value"])
    }

    pub fn scalar(&mut self, name: &str, value: impl Into<Cell>) -> &mut Self {
        self.push(vec![name.into(), Cell::Empty, value.into()]);
        self
    }

    pub fn series<T: Into<Cell> + Copy>(&mut self, name: &str, values: &[T]) -> &mut Self {
        for (i, &v) in values.iter().enumerate() {
            self.push(vec![name.into(), Cell::Int(i as u64), v.into()]);
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dimensionless {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimensionless: Option<Dimensionless>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub metadata: Metadata,
    pub payload: Value,
    pub warnings: Vec<String>,
}

pub fn render_json(env: &Envelope) -> String {
    let mut s = serde_json::to_string_pretty(env).expect("envelope serializes");
    s.push('\n');
    s
}

/// `#` metadata lines, then the header and rows.
pub fn render_csv(env: &Envelope, table: &Table) -> String {
    let m = &env.metadata;
    let mut out = String::new();
    writeln!(out, "# tool: {} {}", m.tool, m.version).unwrap();
    writeln!(out, "# command: {}", m.command).unwrap();
    writeln!(out, "# config: {}", m.config).unwrap();
    if let Some(dc) = m.delta_c {
        out.push_str("# delta_c: ");
        push_float(&mut out, dc);
        out.push('\n');
    }
    if let Some(d) = &m.dimensionless {
        writeln!(
            out,
            "# dimensionless: {}",
            serde_json::to_string(d).unwrap()
        )
        .unwrap();
    }
    if let Some(t) = m.generated_at_unix {
        writeln!(out, "# generated_at_unix: {t}").unwrap();
    }
    for w in &env.warnings {
        writeln!(out, "# warning: {w}").unwrap();
    }
    out.push_str(&table.header.join(","));
    out.push('\n');
    for row in &table.rows {
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            cell.render(&mut out);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        let mut s = String::new();
        push_float(&mut s, 0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        let mut s = String::new();
        push_float(&mut s, f64::INFINITY);
        assert_eq!(s, "inf");
    }

    #[test]
    fn record_table_layout() {
        let mut t = Table::records();
        t.scalar("total", 1.5).series("release", &[1.0, 0.5]);
        assert_eq!(t.rows.len(), 3);
        assert_eq!(t.rows[1][1], Cell::Int(0));
    }
}
