//! CSV tables of numbers and their JSON sidecars.
//!
//! Every output file `x.csv` is accompanied by `x.csv.json` recording the
//! command, its full configuration, the configuration hash, the seed and
//! the schema version, so a run can be reproduced from the sidecar alone.

use crate::config::SCHEMA_VERSION;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A numeric table with a header row.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Shortest round-trip formatting, so reading back is exact.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("writing to memory");
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format_number(*v))).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is utf-8")
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

fn format_number(v: f64) -> String {
    if v.is_finite() && v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

/// Parse a table written by [`Table::to_csv`]: a non-empty header of
/// distinct names, then rows of the same width holding finite numbers.
pub fn read_csv(text: &str) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse(format!("csv header: {e}")))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.is_empty() || header.iter().any(|h| h.is_empty()) {
        return Err(Error::Parse("csv header has empty column names".into()));
    }
    let mut seen = std::collections::HashSet::new();
    if !header.iter().all(|h| seen.insert(h.as_str())) {
        return Err(Error::Parse("csv header repeats a column name".into()));
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("csv row {}: {e}", line + 1)))?;
        if record.len() != header.len() {
            return Err(Error::Parse(format!("csv row {} has {} fields, expected {}", line + 1, record.len(), header.len())));
        }
        let row = record
            .iter()
            .map(|f| match f.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse(format!("csv row {}: {f:?} is not a finite number", line + 1))),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

/// Companion record of an output file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub schema_version: u32,
    pub software_version: String,
    pub command: Vec<String>,
    pub config_hash: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    /// The arguments that determine the output, as parsed.
    pub config: serde_json::Value,
}

impl Sidecar {
    pub fn new(command: Vec<String>, config: serde_json::Value, seed: u64) -> Self {
        let hash = hash_value(&config);
        Sidecar {
            schema_version: SCHEMA_VERSION,
            software_version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            config_hash: hash,
            seed,
            measure_id: None,
            grid: None,
            config,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sidecars always serialize")
    }
}

/// SHA-256 of the compact JSON form, hex encoded.
pub fn hash_value(value: &serde_json::Value) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(value.to_string().as_bytes()))
}

/// Parse and check a sidecar: known schema, and a hash matching its config.
pub fn read_sidecar(text: &str) -> Result<Sidecar> {
    let s: Sidecar = serde_json::from_str(text).map_err(|e| Error::Parse(format!("sidecar: {e}")))?;
    if s.schema_version != SCHEMA_VERSION {
        return Err(Error::invalid(format!("unsupported sidecar schema version {}", s.schema_version)));
    }
    if hash_value(&s.config) != s.config_hash {
        return Err(Error::invalid("sidecar hash does not match its config"));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_round_trip_is_exact() {
        let mut t = Table::new(&["k", "re_alpha", "im_alpha", "rho"]);
        t.push(vec![0.0, -0.5, 1e-300, 0.8660254037844386]);
        t.push(vec![1.0, 1.0 / 3.0, -0.0, 0.1]);
        let back = read_csv(&t.to_csv()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn malformed_tables_are_rejected() {
        for bad in ["", "a,a\n1,2\n", "a,b\n1\n", "a,b\n1,x\n", "a,b\n1,NaN\n", "a,,b\n1,2,3\n"] {
            assert!(read_csv(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn sidecar_hash_is_checked() {
        let s = Sidecar::new(vec!["alphas".into()], serde_json::json!({"count": 3}), 7);
        assert_eq!(read_sidecar(&s.to_json()).unwrap(), s);
        let tampered = s.to_json().replace("\"count\": 3", "\"count\": 4");
        assert!(read_sidecar(&tampered).is_err());
    }
}
