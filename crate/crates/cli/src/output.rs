use std::fmt;
use std::hash::Hasher;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use crate::args::Format;

/// Exit code 2 for anything the user can fix by changing arguments or
/// inputs, exit code 1 for I/O and other runtime failures.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        let (kind, message) = match self {
            CliError::Validation(m) => ("validation", m),
            CliError::Runtime(m) => ("runtime", m),
        };
        json!({ "error": { "kind": kind, "message": message } })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<spinsq_core::Error> for CliError {
    fn from(e: spinsq_core::Error) -> Self {
        match e {
            spinsq_core::Error::Io(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn invalid<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Validation(msg.into()))
}

/// FNV-1a over the canonical JSON of the effective configuration. Keys are
/// sorted by `serde_json`, so the hash does not depend on flag order or on
/// whether a value came from a config file.
pub fn config_hash(config: &Value) -> String {
    let mut h = fnv::FnvHasher::default();
    h.write(config.to_string().as_bytes());
    format!("{:016x}", h.finish())
}

/// Tabular form of a result, for CSV output.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

pub struct Report {
    pub command: &'static str,
    pub config: Value,
    pub seed: Option<u64>,
    pub result: Value,
    pub table: Table,
    pub default_format: Format,
    /// Extra `key=value` pairs for the CSV header line.
    pub notes: Vec<(String, String)>,
}

fn open(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(path) => {
            Box::new(std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| {
                CliError::Runtime(format!("cannot write {}: {e}", path.display()))
            })?))
        }
        None => Box::new(std::io::stdout().lock()),
    })
}

pub fn write_bytes(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    let mut w = open(out)?;
    w.write_all(bytes)?;
    w.flush()?;
    Ok(())
}

pub fn write_report(report: Report, format: Option<Format>, out: Option<&Path>) -> CliResult<()> {
    let hash = config_hash(&report.config);
    let mut w = open(out)?;
    match format.unwrap_or(report.default_format) {
        Format::Json => {
            let mut doc = json!({
                "schema": format!("spinsq-{} v1", report.command),
                "config": report.config,
                "config_hash": hash,
                "result": report.result,
            });
            if let Some(seed) = report.seed {
                doc["seed"] = json!(seed);
            }
            serde_json::to_writer_pretty(&mut w, &doc)?;
            writeln!(w)?;
        }
        Format::Csv => {
            let mut line = format!("# spinsq-{} v1 config_hash={hash}", report.command);
            if let Some(seed) = report.seed {
                line.push_str(&format!(" seed={seed}"));
            }
            if let Value::Object(map) = &report.config {
                for (k, v) in map {
                    match v {
                        Value::Null => {}
                        Value::String(s) => line.push_str(&format!(" {k}={s}")),
                        other => line.push_str(&format!(" {k}={other}")),
                    }
                }
            }
            for (k, v) in &report.notes {
                line.push_str(&format!(" {k}={v}"));
            }
            writeln!(w, "{line}")?;
            let mut csv = csv::Writer::from_writer(&mut w);
            csv.write_record(&report.table.header)?;
            for row in &report.table.rows {
                csv.write_record(row)?;
            }
            csv.flush()?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_key_order() {
        let a: Value = serde_json::from_str(r#"{"k":1,"state":"dicke:4:2"}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{"state":"dicke:4:2","k":1}"#).unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        let c: Value = serde_json::from_str(r#"{"state":"dicke:4:2","k":2}"#).unwrap();
        assert_ne!(config_hash(&a), config_hash(&c));
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::from(spinsq_core::Error::Parse("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(spinsq_core::Error::Io("x".into())).exit_code(), 1);
        let v = CliError::Validation("bad k".into()).to_json();
        assert_eq!(v["error"]["kind"], "validation");
    }
}
