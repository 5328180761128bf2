//! CSV tables, the truncation ledger and the run manifest.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::CliError;

/// Scientific notation with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON number, or a string for non-finite values.
pub fn json_num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(headers).expect("in-memory write");
        Table { writer }
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(cells).expect("in-memory write");
    }

    pub fn finish(self) -> String {
        String::from_utf8(self.writer.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LedgerEntry {
    pub item: String,
    /// Bound on the error incurred; a string when unbounded or undeclared.
    pub bound: Value,
    pub note: String,
}

impl LedgerEntry {
    pub fn new(item: &str, bound: f64, note: impl Into<String>) -> Self {
        LedgerEntry {
            item: item.into(),
            bound: json_num(bound),
            note: note.into(),
        }
    }

    pub fn undeclared(item: &str, note: impl Into<String>) -> Self {
        LedgerEntry {
            item: item.into(),
            bound: json!("undeclared"),
            note: note.into(),
        }
    }
}

#[derive(Default)]
pub struct TaskOutput {
    pub files: Vec<(String, String)>,
    pub ledger: Vec<LedgerEntry>,
    pub diagnostics: serde_json::Map<String, Value>,
}

impl TaskOutput {
    pub fn file(&mut self, name: &str, table: Table) {
        self.files.push((name.into(), table.finish()));
    }

    pub fn note(&mut self, key: &str, value: Value) {
        self.diagnostics.insert(key.into(), value);
    }
}

pub fn manifest(cfg: &RunConfig, out: &TaskOutput) -> String {
    let files: Vec<&str> = out.files.iter().map(|(n, _)| n.as_str()).collect();
    let value = json!({
        "tool": concat!("ruelle ", env!("CARGO_PKG_VERSION")),
        "schema_version": cfg.version,
        "task": cfg.task.name(),
        "config": cfg,
        "tolerances": cfg.numeric,
        "truncation_ledger": out.ledger,
        "diagnostics": out.diagnostics,
        "files": files,
    });
    let mut text = serde_json::to_string_pretty(&value).expect("manifest serializes");
    text.push('\n');
    text
}

/// Writes every artifact plus `manifest.json` once the task has succeeded.
pub fn write_all(dir: &Path, cfg: &RunConfig, out: &TaskOutput) -> Result<Vec<PathBuf>, CliError> {
    let io = |e: std::io::Error, p: &Path| {
        CliError::new(ruelle_core::ErrorKind::Resource, format!("cannot write {}: {e}", p.display()))
    };
    std::fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
    let mut written = Vec::new();
    let manifest = manifest(cfg, out);
    for (name, contents) in out.files.iter().map(|(n, c)| (n.as_str(), c)).chain([("manifest.json", &manifest)]) {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| io(e, &path))?;
        written.push(path);
    }
    Ok(written)
}
