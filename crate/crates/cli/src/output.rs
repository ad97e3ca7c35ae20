//! One JSON document (or one CSV table) per invocation.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use fracindex::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

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
        self.rows.push(row);
    }

    fn render(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::NumericalFailure(format!("csv: {e}"));
        if !self.header.is_empty() {
            w.write_record(&self.header).map_err(io)?;
        }
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::NumericalFailure(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }
}

/// What a subcommand produced: always a JSON document, optionally a table.
pub struct Output {
    pub json: serde_json::Value,
    pub table: Option<Table>,
}

impl Output {
    pub fn json<S: Serialize>(v: &S) -> Result<Self> {
        Ok(Self {
            json: to_value(v)?,
            table: None,
        })
    }

    pub fn with_table(mut self, t: Table) -> Self {
        self.table = Some(t);
        self
    }
}

pub fn to_value<S: Serialize>(v: &S) -> Result<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| Error::NumericalFailure(format!("serialization: {e}")))
}

pub fn num(x: f64) -> String {
    // shortest round-trip representation, like the JSON output
    serde_json::to_string(&x).unwrap_or_else(|_| "NaN".into())
}

pub fn emit(out: Output, format: Format, path: Option<&PathBuf>) -> Result<()> {
    let text = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out.json)
                .map_err(|e| Error::NumericalFailure(format!("serialization: {e}")))?;
            s.push('\n');
            s
        }
        Format::Csv => match &out.table {
            Some(t) => t.render()?,
            None => {
                return Err(Error::Unsupported(
                    "this subcommand has no CSV form; use --format json".into(),
                ))
            }
        },
    };
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::NumericalFailure(format!("stdout: {e}")))
        }
    }
}
