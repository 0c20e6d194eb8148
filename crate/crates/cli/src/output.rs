use std::collections::BTreeMap;
use std::io::{self, Write};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// The single JSON document every command prints on success.
#[derive(Debug, Serialize)]
pub struct Envelope {
    pub schema_version: u32,
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub result: Value,
    pub elapsed_ms: u64,
}

pub struct Report {
    command: &'static str,
    started: Instant,
    parameters: BTreeMap<String, Value>,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Report {
            command,
            started: Instant::now(),
            parameters: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters
            .insert(key.to_string(), serde_json::to_value(value).expect("parameter serializes"));
        self
    }

    pub fn envelope(self, result: Value) -> Envelope {
        Envelope {
            schema_version: SCHEMA_VERSION,
            command: self.command.to_string(),
            parameters: self.parameters,
            result,
            elapsed_ms: self.started.elapsed().as_millis() as u64,
        }
    }
}

pub fn print_json(out: &mut dyn Write, envelope: &Envelope) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, envelope)?;
    writeln!(out)
}

/// Minimal CSV writer; fields containing separators are quoted.
pub fn print_csv(out: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let fields: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

fn csv_field(f: &str) -> String {
    if f.contains([',', '"', '\n']) {
        format!("\"{}\"", f.replace('"', "\"\""))
    } else {
        f.to_string()
    }
}

pub fn print_lines(out: &mut dyn Write, lines: &[String]) -> io::Result<()> {
    for line in lines {
        writeln!(out, "{line}")?;
    }
    Ok(())
}
