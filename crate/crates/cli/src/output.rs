//! Output rendering: CSV (RFC-4180 quoting), JSON (stable key order) and a
//! plain table for humans. All numeric text is locale-independent: doubles
//! are printed with 17 significant digits, exact integers and rationals in
//! full decimal form.

use std::io::Write;

use serde_json::{Map, Number, Value};

use crate::config::OutputFormat;

/// One output cell.
#[derive(Debug, Clone)]
pub enum Cell {
    Int(u64),
    Float(f64),
    /// Pre-rendered exact value (big integer or rational) or label.
    Text(String),
}

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// 15 significant digits, for the ad-hoc `special` evaluator.
pub fn fmt_float_15(x: f64) -> String {
    format!("{x:.14e}")
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_float(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::Number(Number::from(*v)),
            Cell::Float(v) => Number::from_f64(*v)
                .map(Value::Number)
                .unwrap_or_else(|| Value::String(fmt_float(*v))),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

/// A rectangular result: column names plus rows.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, format: OutputFormat, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            OutputFormat::Csv => self.write_csv(out),
            OutputFormat::Json => self.write_json(out),
            OutputFormat::Table => self.write_plain(out),
        }
    }

    fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(&self.columns)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(|c| c.render()))?;
        }
        writer.flush()
    }

    fn write_json(&self, out: &mut dyn Write) -> std::io::Result<()> {
        // serde_json's default map is a BTreeMap: key order is sorted and
        // therefore byte-stable across runs.
        let array: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut object = Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    object.insert((*name).to_string(), cell.to_json());
                }
                Value::Object(object)
            })
            .collect();
        writeln!(out, "{}", serde_json::to_string_pretty(&Value::Array(array))?)
    }

    fn write_plain(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let rendered: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::render).collect())
            .collect();
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.len()).collect();
        for row in &rendered {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        for (i, name) in self.columns.iter().enumerate() {
            if i > 0 {
                write!(out, "  ")?;
            }
            write!(out, "{name:>width$}", width = widths[i])?;
        }
        writeln!(out)?;
        for row in &rendered {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    write!(out, "  ")?;
                }
                write!(out, "{cell:>width$}", width = widths[i])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_has_17_digits() {
        let s = fmt_float(std::f64::consts::PI);
        assert_eq!(s, "3.1415926535897931e0");
    }

    #[test]
    fn csv_rendering() {
        let mut t = Table::new(vec!["n", "c_n"]);
        t.push(vec![Cell::Int(3), Cell::Text("13/6".to_string())]);
        let mut buf = Vec::new();
        t.write(OutputFormat::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,c_n\n3,13/6\n");
    }

    #[test]
    fn json_rendering_sorted_keys() {
        let mut t = Table::new(vec!["n", "c_n"]);
        t.push(vec![Cell::Int(1), Cell::Int(1)]);
        let mut buf = Vec::new();
        t.write(OutputFormat::Json, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v[0]["n"], 1);
    }
}
