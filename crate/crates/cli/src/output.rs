//! Result tables and their CSV/JSON encodings.

use crate::config::{Format, SweepConfig};
use anyhow::Result;
use cylheat::constants::TABLE;
use serde_json::{Map, Value};
use std::io::Write;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Empty => Value::Null,
        }
    }
}

pub type Row = Vec<(&'static str, Cell)>;

#[derive(Debug, Default)]
pub struct Table {
    pub rows: Vec<Row>,
}

impl Table {
    pub fn failures(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.iter().any(|(k, v)| *k == "error" && !matches!(v, Cell::Empty)))
            .count()
    }

    fn columns(&self) -> Vec<&'static str> {
        self.rows.first().map(|r| r.iter().map(|(k, _)| *k).collect()).unwrap_or_default()
    }
}

fn metadata(cfg: &SweepConfig) -> Result<Vec<(String, String)>> {
    let mut m = vec![
        ("tool".to_string(), format!("cylheat {}", env!("CARGO_PKG_VERSION"))),
        ("command".to_string(), cfg.command().name().to_string()),
        ("config_sha256".to_string(), cfg.hash()?),
        ("temperature_K".to_string(), cfg.temperature.to_string()),
    ];
    for (name, value, unit) in TABLE {
        m.push((format!("const_{name}"), format!("{value:e} {unit}")));
    }
    Ok(m)
}

pub fn write(table: &Table, cfg: &SweepConfig, format: Format, out: &mut dyn Write) -> Result<()> {
    let meta = metadata(cfg)?;
    match format {
        Format::Csv => {
            for (k, v) in &meta {
                writeln!(out, "# {k}: {v}")?;
            }
            let mut w = csv::Writer::from_writer(out);
            w.write_record(table.columns())?;
            for row in &table.rows {
                w.write_record(row.iter().map(|(_, c)| c.csv()))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let meta: Map<String, Value> = meta.into_iter().map(|(k, v)| (k, Value::from(v))).collect();
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|r| Value::Object(r.iter().map(|(k, c)| (k.to_string(), c.json())).collect()))
                .collect();
            let doc = serde_json::json!({ "metadata": meta, "rows": rows });
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)?;
        }
    }
    Ok(())
}
