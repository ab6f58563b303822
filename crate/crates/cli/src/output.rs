use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;
use ssh_doubling::Model;

use crate::CliError;

pub const SCHEMA_VERSION: &str = "1";

/// Top-level JSON document shared by every command.
#[derive(Serialize)]
pub struct Document<P: Serialize> {
    schema_version: &'static str,
    command: &'static str,
    parameters: BTreeMap<String, Value>,
    payload: P,
}

impl<P: Serialize> Document<P> {
    pub fn new(command: &'static str, model: &Model, payload: P) -> Self {
        let mut parameters: BTreeMap<String, Value> = model
            .parameters()
            .into_iter()
            .map(|(k, v)| {
                let v = if k == "N" { Value::from(v as u64) } else { Value::from(v) };
                (k, v)
            })
            .collect();
        parameters.insert("model".into(), Value::from(model.name()));
        Document {
            schema_version: SCHEMA_VERSION,
            command,
            parameters,
            payload,
        }
    }

    pub fn scan(model: &str, payload: P) -> Self {
        let parameters = BTreeMap::from([
            ("model".to_string(), Value::from(model)),
            ("scan".to_string(), Value::from("default")),
        ]);
        Document {
            schema_version: SCHEMA_VERSION,
            command: "verify",
            parameters,
            payload,
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Shortest round-trip representation.
pub fn float(x: f64) -> String {
    if x.is_finite() {
        ryu::Buffer::new().format_finite(x).to_string()
    } else {
        x.to_string()
    }
}

pub fn param_string(p: &BTreeMap<String, f64>) -> String {
    p.iter()
        .map(|(k, v)| format!("{k}={}", float(*v)))
        .collect::<Vec<_>>()
        .join(";")
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<const K: usize>(header: [&str; K]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_header(&mut self, h: &str) {
        self.header.push(h.to_string());
    }

    pub fn row(&mut self, r: impl IntoIterator<Item = String>) {
        self.rows.push(r.into_iter().collect());
    }

    pub fn finish(self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
