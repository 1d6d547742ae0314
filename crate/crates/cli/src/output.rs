//! Tabular output as CSV or JSON.

use std::io::Write;

use serde_json::{Map, Value};

use crate::config::Format;

/// Significant digits of a full-precision number.
pub const FULL_DIGITS: usize = 17;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    /// An echoed input, printed in its shortest exact form.
    Param(f64),
    /// Rounded to a fixed number of decimals unless digits are requested explicitly.
    Fixed(f64, usize),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, out: &mut dyn Write, format: Format, digits: Option<usize>) -> std::io::Result<()> {
        match format {
            Format::Csv => self.write_csv(out, digits),
            Format::Json => self.write_json(out, digits),
        }
    }

    fn write_csv(&self, out: &mut dyn Write, digits: Option<usize>) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| render(c, digits)))?;
        }
        w.flush()
    }

    fn write_json(&self, out: &mut dyn Write, digits: Option<usize>) -> std::io::Result<()> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    self.columns.iter().cloned().zip(row.iter().map(|c| json_value(c, digits))).collect();
                Value::Object(obj)
            })
            .collect();
        serde_json::to_writer_pretty(&mut *out, &rows)?;
        writeln!(out)
    }
}

fn render(cell: &Cell, digits: Option<usize>) -> String {
    match cell {
        Cell::Num(v) => significant(*v, digits.unwrap_or(FULL_DIGITS)),
        Cell::Fixed(v, places) => match digits {
            Some(d) => significant(*v, d),
            None => format!("{v:.places$}"),
        },
        Cell::Param(v) => v.to_string(),
        Cell::Int(v) => v.to_string(),
        Cell::Bool(b) => b.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

fn json_value(cell: &Cell, digits: Option<usize>) -> Value {
    let number = |v: f64| serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null);
    match cell {
        Cell::Num(v) => match digits {
            Some(d) => number(significant(*v, d).parse().unwrap_or(*v)),
            None => number(*v),
        },
        Cell::Param(v) => number(*v),
        Cell::Fixed(..) => number(render(cell, digits).parse().unwrap_or(f64::NAN)),
        Cell::Int(v) => Value::from(*v),
        Cell::Bool(b) => Value::Bool(*b),
        Cell::Text(s) => Value::String(s.clone()),
        Cell::Empty => Value::Null,
    }
}

/// `v` with `digits` significant digits, positional for moderate exponents.
pub fn significant(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let digits = digits.max(1);
    if v == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-5..16).contains(&exp) {
        let places = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{v:.places$}")
    } else {
        sci
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(significant(0.25, 17), "0.25000000000000000");
        assert_eq!(significant(0.479_436_790_556, 4), "0.4794");
        assert_eq!(significant(228.571_428_571_428_57, 6), "228.571");
        assert_eq!(significant(1.5e-9, 3), "1.50e-9");
        assert_eq!(significant(0.0, 3), "0.00");
        assert_eq!(significant(12345.0, 2), "12345");
        // Full precision round-trips.
        let v = 0.1 + 0.2;
        assert_eq!(significant(v, 17).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn csv_and_json_layout() {
        let mut t = Table::new(&["V", "value", "ok"]);
        t.push(vec![Cell::Param(0.2), Cell::Fixed(0.187_615_8, 6), Cell::Bool(true)]);
        let mut csv = Vec::new();
        t.write(&mut csv, Format::Csv, None).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "V,value,ok\n0.2,0.187616,true\n");
        let mut json = Vec::new();
        t.write(&mut json, Format::Json, None).unwrap();
        let v: Value = serde_json::from_slice(&json).unwrap();
        assert_eq!(v[0]["value"], Value::from(0.187616));
        assert_eq!(v[0]["V"], Value::from(0.2));
    }
}
