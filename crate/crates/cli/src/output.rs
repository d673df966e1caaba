//! Row-oriented output: CSV with a header naming every column, or
//! NDJSON with one object per row.  Floats print at 17 significant
//! digits so doubles round-trip exactly.

use std::io::Write;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Value {
    fn csv(&self) -> String {
        match self {
            Value::Float(v) => format_float(*v),
            Value::Int(v) => v.to_string(),
            Value::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Value::Float(v) => serde_json::json!(v),
            Value::Int(v) => serde_json::json!(v),
            Value::Text(s) => serde_json::json!(s),
        }
    }
}

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| v.csv()).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn write_ndjson(&self, out: &mut dyn Write) -> std::io::Result<()> {
        for row in &self.rows {
            let obj: serde_json::Map<String, serde_json::Value> = self
                .columns
                .iter()
                .zip(row)
                .map(|(c, v)| (c.to_string(), v.json()))
                .collect();
            writeln!(out, "{}", serde_json::Value::Object(obj))?;
        }
        Ok(())
    }

    pub fn write(&self, out: &mut dyn Write, ndjson: bool) -> std::io::Result<()> {
        if ndjson {
            self.write_ndjson(out)
        } else {
            self.write_csv(out)
        }
    }
}
