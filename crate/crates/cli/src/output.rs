//! CSV and JSON emission. Numbers use Rust's shortest round-trip
//! formatting, switching to exponent notation outside `[1e-5, 1e16)`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    footer: Vec<(String, String)>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
            footer: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// `# key=value` lines after the rows.
    pub fn footer(&mut self, key: &str, value: String) {
        self.footer.push((key.to_string(), value));
    }

    pub fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for r in &self.rows {
            writeln!(w, "{}", r.join(","))?;
        }
        for (k, v) in &self.footer {
            writeln!(w, "# {k}={v}")?;
        }
        Ok(())
    }

    /// Rows as objects keyed by column; empty cells become `null`, numeric
    /// and boolean cells keep their type.
    pub fn to_json(&self) -> serde_json::Value {
        let cell = |c: &String| -> serde_json::Value {
            if c.is_empty() {
                serde_json::Value::Null
            } else if let Ok(b) = c.parse::<bool>() {
                serde_json::Value::from(b)
            } else if let Ok(v) = c.parse::<f64>() {
                serde_json::Value::from(v)
            } else {
                serde_json::Value::from(c.as_str())
            }
        };
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: serde_json::Map<_, _> = self.header.iter().cloned().zip(r.iter().map(cell)).collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        let mut top = serde_json::Map::new();
        top.insert("rows".into(), serde_json::Value::Array(rows));
        if !self.footer.is_empty() {
            let summary: serde_json::Map<_, _> = self.footer.iter().map(|(k, v)| (k.clone(), cell(v))).collect();
            top.insert("summary".into(), serde_json::Value::Object(summary));
        }
        serde_json::Value::Object(top)
    }
}

/// Writes to `path`, or standard output when `None`.
pub fn emit(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

pub fn write_json(w: &mut dyn Write, value: &impl Serialize) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)
}

pub fn write_table(w: &mut dyn Write, table: &Table, json: bool) -> io::Result<()> {
    if json {
        write_json(w, &table.to_json())
    } else {
        let mut w = w;
        table.write_csv(&mut w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [
            0.0,
            1.0,
            -2.5,
            1.0 / 3.0,
            1e-7,
            6.02e23,
            f64::MIN_POSITIVE,
            4.0 * 2f64.sqrt(),
        ] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(1e-7), "1e-7");
        assert_eq!(num(0.5), "0.5");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![num(1.0), String::new()]);
        t.footer("max", num(0.25));
        let mut out = Vec::new();
        t.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "a,b\n1,\n# max=0.25\n");
    }
}
