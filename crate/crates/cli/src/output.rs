//! CSV and JSON emission.
//!
//! Every CSV file opens with two comment lines: the versioned schema and the
//! resolved config as compact JSON. Floats use shortest round-trip decimals
//! in both formats, so the same run yields identical numbers in each.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::records::{PointError, SweepRecord, SweepRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

/// One JSON output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<R> {
    pub schema: String,
    pub command: String,
    pub config: Config,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<Value>,
    pub records: Vec<R>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<PointError>,
}

pub fn schema_id(kind: &str) -> String {
    format!("plasmonium/{kind}/v1")
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, "create directory", e))
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, "write", e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub fn write_csv<R: Serialize>(path: &Path, schema: &str, config: &Config, rows: &[R]) -> CliResult<()> {
    let echo = serde_json::to_string(config).map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut buf = format!("# schema: {schema}\n# config: {echo}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for row in rows {
            w.serialize(row).map_err(|e| CliError::Runtime(format!("csv encoding failed: {e}")))?;
        }
        w.flush().map_err(|e| CliError::io(path, "write", e))?;
    }
    write_file(path, &buf)
}

pub fn read_csv<R: DeserializeOwned>(path: &Path) -> CliResult<Vec<R>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    reader
        .deserialize()
        .map(|r| r.map_err(|e| CliError::Runtime(format!("{}: {e}", path.display()))))
        .collect()
}

pub fn read_json<R: DeserializeOwned>(path: &Path) -> CliResult<Document<R>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, "read", e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

/// Loads sweep records from CSV and re-checks each one.
pub fn load_sweep_csv(path: &Path) -> CliResult<Vec<SweepRecord>> {
    let rows: Vec<SweepRow> = read_csv(path)?;
    rows.into_iter()
        .map(|row| {
            let record = SweepRecord::try_from(row)?;
            record.validate()?;
            Ok(record)
        })
        .collect()
}

/// Loads a sweep JSON document and re-checks each record.
pub fn load_sweep_json(path: &Path) -> CliResult<Document<SweepRecord>> {
    let doc: Document<SweepRecord> = read_json(path)?;
    doc.records.iter().try_for_each(SweepRecord::validate)?;
    Ok(doc)
}

/// Paths written by one command, in write order.
#[derive(Debug, Default)]
pub struct Written(pub Vec<PathBuf>);

impl Written {
    pub fn push(&mut self, p: PathBuf) {
        self.0.push(p);
    }
}
