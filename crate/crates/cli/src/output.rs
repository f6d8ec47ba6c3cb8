//! CSV tables, JSON-lines records and the run manifest.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const NA: &str = "NA";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Na,
}

impl Cell {
    /// Floats carry 17 significant digits so reruns compare byte for byte.
    pub fn render(&self) -> String {
        match self {
            // Negative zero prints as zero.
            Self::Num(v) if *v == 0.0 => format!("{:.16e}", 0.0),
            Self::Num(v) if v.is_finite() => format!("{v:.16e}"),
            Self::Num(v) => format!("{v}"),
            Self::Int(n) => n.to_string(),
            Self::Text(s) => s.clone(),
            Self::Na => NA.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Self::Na, Self::Num)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| CliError::Output(e.to_string()))
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }
}

/// Files produced by one command, in the order they are written.
#[derive(Debug, Default)]
pub struct CommandOutput {
    pub files: Vec<(String, Vec<u8>)>,
    pub seeds: Vec<u64>,
}

impl CommandOutput {
    pub fn add_table(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        self.files.push((name.to_string(), table.to_csv()?));
        Ok(())
    }

    pub fn add_jsonl<S: Serialize>(&mut self, name: &str, records: &[S]) -> Result<(), CliError> {
        let mut buf = Vec::new();
        for r in records {
            serde_json::to_writer(&mut buf, r)?;
            buf.push(b'\n');
        }
        self.files.push((name.to_string(), buf));
        Ok(())
    }

    pub fn file(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// SHA-256 of the resolved configuration; equal hashes give identical tables.
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<OutputEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Writes every output and `manifest.json` into `dir`.
pub fn write_outputs(
    dir: &Path,
    command: &str,
    config_hash: String,
    started: String,
    out: &CommandOutput,
) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))?;
    let mut entries = Vec::new();
    for (name, bytes) in &out.files {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::Io(path.clone(), e))?;
        entries.push(OutputEntry {
            file: name.clone(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
    }
    let manifest = RunManifest {
        tool: "nek",
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        config_hash,
        seeds: out.seeds.clone(),
        started,
        finished: timestamp(),
        outputs: entries,
    };
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_vec_pretty(&manifest)?;
    text.push(b'\n');
    std::fs::write(&path, text).map_err(|e| CliError::Io(path.clone(), e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_significant_digits() {
        assert_eq!(Cell::Num(0.1).render(), "1.0000000000000001e-1");
        assert_eq!(Cell::Num(-2.5).render(), "-2.5000000000000000e0");
        assert_eq!(Cell::Na.render(), "NA");
        assert_eq!(Cell::from(None::<f64>), Cell::Na);
    }

    #[test]
    fn csv_quotes_text_with_commas() {
        let mut t = Table::new(&["x", "status"]);
        t.push(vec![Cell::Num(1.0), Cell::Text("bad, really".into())]);
        let s = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(s, "x,status\n1.0000000000000000e0,\"bad, really\"\n");
    }

    #[test]
    fn manifest_lists_every_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = CommandOutput::default();
        let mut t = Table::new(&["a"]);
        t.push(vec![Cell::Int(3)]);
        out.add_table("t.csv", &t).unwrap();
        out.add_jsonl("r.jsonl", &[serde_json::json!({"k": 1})]).unwrap();
        let path = write_outputs(dir.path(), "test", "abc".into(), timestamp(), &out).unwrap();
        let m: serde_json::Value = serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap();
        let files = m["outputs"].as_array().unwrap();
        assert_eq!(files.len(), 2);
        assert_eq!(files[0]["sha256"], sha256_hex(b"a\n3\n"));
    }
}
