//! Plot-ready tables rendered as CSV or JSON.

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::Format;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(k: usize) -> Self {
        Cell::Int(k as u64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Trailing `key,value` rows.
    pub summary: Vec<(&'static str, f64)>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Twelve significant digits; plain notation for moderate magnitudes, trailing zeros trimmed.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Num(x) => fmt_sig(*x),
        Cell::Int(k) => k.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

fn json_cell(c: &Cell) -> Value {
    match c {
        Cell::Num(x) => json!(x),
        Cell::Int(k) => json!(k),
        Cell::Text(s) => json!(s),
        Cell::Empty => Value::Null,
    }
}

pub fn config_hash(command: &str, canonical_config: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update(b"\n");
    h.update(canonical_config);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn render(table: &Table, format: Format, command: &str, hash: &str) -> String {
    match format {
        Format::Csv => {
            let width = table.columns.len().max(2);
            let mut out = table.columns.join(",");
            out.push('\n');
            for row in &table.rows {
                out.push_str(&row.iter().map(csv_cell).collect::<Vec<_>>().join(","));
                out.push('\n');
            }
            for (k, v) in &table.summary {
                out.push_str(&format!("{k},{}{}\n", fmt_sig(*v), ",".repeat(width - 2)));
            }
            out.push_str(&format!("# version={VERSION}, command={command}, config_hash={hash}\n"));
            out
        }
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|r| {
                    let m: Map<String, Value> = table
                        .columns
                        .iter()
                        .zip(r)
                        .map(|(c, v)| (c.to_string(), json_cell(v)))
                        .collect();
                    Value::Object(m)
                })
                .collect();
            let summary: Map<String, Value> = table.summary.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
            let doc = json!({
                "command": command,
                "version": VERSION,
                "config_hash": hash,
                "columns": table.columns,
                "rows": rows,
                "summary": summary,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("json");
            s.push('\n');
            s
        }
    }
}
