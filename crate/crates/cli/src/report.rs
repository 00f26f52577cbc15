//! JSON and CSV report emission.
//!
//! JSON reports carry a provenance block; CSV output is the bare table so that
//! it stays RFC 4180 and loads directly into other tools. Nothing depends on
//! the wall clock, so identical inputs give identical bytes.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::args::{Format, OutputArgs};
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema: u32,
    pub command: &'static str,
    pub seed: Option<u64>,
    /// SHA-256 of the resolved configuration as canonical JSON.
    pub config_hash: String,
}

impl Provenance {
    pub fn new(
        command: &'static str,
        seed: Option<u64>,
        resolved: &impl Serialize,
    ) -> Result<Self, CliError> {
        // serde_json maps keep keys sorted, so this encoding is canonical.
        let canonical = serde_json::to_vec(&serde_json::to_value(resolved)?)?;
        let digest = Sha256::digest(&canonical);
        Ok(Self {
            tool: "polar-ot",
            version: env!("CARGO_PKG_VERSION"),
            schema: SCHEMA_VERSION,
            command,
            seed,
            config_hash: digest.iter().map(|b| format!("{b:02x}")).collect(),
        })
    }
}

/// A header and string rows.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))
    }
}

/// Everything a command can emit.
pub struct Report {
    pub provenance: Provenance,
    pub body: Value,
    pub table: Table,
    pub scalar: Option<String>,
}

impl Report {
    pub fn new(
        provenance: Provenance,
        body: &impl Serialize,
        table: Table,
    ) -> Result<Self, CliError> {
        Ok(Self {
            provenance,
            body: serde_json::to_value(body)?,
            table,
            scalar: None,
        })
    }

    pub fn json(&self) -> Result<Vec<u8>, CliError> {
        let mut obj = json!({ "provenance": self.provenance });
        if let (Value::Object(dst), Value::Object(src)) = (&mut obj, &self.body) {
            dst.extend(src.clone());
        }
        let mut out = serde_json::to_vec_pretty(&obj)?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Json => self.json(),
            Format::Csv => self.table.to_csv(),
            Format::Text => match &self.scalar {
                Some(s) => Ok(format!("{s}\n").into_bytes()),
                None => Err(CliError::Usage(format!(
                    "format: text is only available for cp-bound ({})",
                    self.provenance.command
                ))),
            },
        }
    }

    pub fn emit(&self, out: &OutputArgs, default: Format) -> Result<(), CliError> {
        let bytes = self.render(out.format.unwrap_or(default))?;
        write_output(out.out.as_deref(), &bytes)
    }
}

pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, bytes).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// 1-based copy of 0-based indices.
pub fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(&["a", "b"]);
        assert_eq!(t.to_csv().unwrap(), b"a,b\r\n");
    }

    #[test]
    fn csv_quotes_fields() {
        let mut t = Table::new(&["x"]);
        t.push(vec!["(1 2),(3 4)".into()]);
        assert_eq!(t.to_csv().unwrap(), b"x\r\n\"(1 2),(3 4)\"\r\n");
    }

    #[test]
    fn hash_is_key_order_independent() {
        let a = Provenance::new("t", None, &json!({"x": 1, "y": 2})).unwrap();
        let b = Provenance::new("t", None, &json!({"y": 2, "x": 1})).unwrap();
        assert_eq!(a.config_hash, b.config_hash);
        assert_eq!(a.config_hash.len(), 64);
    }

    #[test]
    fn json_merges_body_after_provenance() {
        let p = Provenance::new("t", Some(3), &json!({})).unwrap();
        let r = Report::new(p, &json!({"value": 1.5}), Table::default()).unwrap();
        let v: Value = serde_json::from_slice(&r.json().unwrap()).unwrap();
        assert_eq!(v["value"], 1.5);
        assert_eq!(v["provenance"]["seed"], 3);
        assert!(r.render(Format::Text).is_err());
    }
}
