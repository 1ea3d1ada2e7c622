//! CSV tables with a comment header, and JSON summaries.
//!
//! The CSV header is a block of `# key value` lines: the experiment name,
//! the configuration digest and any experiment-specific values such as
//! `K`.  Floats are printed in shortest round-trip form so the bytes only
//! depend on the configuration.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub header: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: Value,
}

impl Report {
    pub fn new(columns: &[&'static str]) -> Self {
        Report {
            header: Vec::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
            summary: json!({}),
        }
    }

    pub fn header(&mut self, key: &str, value: impl ToString) {
        self.header.push((key.to_string(), value.to_string()));
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn csv(&self, experiment: &str, digest: &str) -> CliResult<Vec<u8>> {
        let mut out = Vec::new();
        let _ = writeln!(out, "# unitrans {experiment}");
        let _ = writeln!(out, "# config-sha256 {digest}");
        for (k, v) in &self.header {
            let _ = writeln!(out, "# {k} {v}");
        }
        let mut w = csv::Writer::from_writer(out);
        let fail = |e: csv::Error| CliError::Config(format!("CSV encoding failed: {e}"));
        w.write_record(&self.columns).map_err(fail)?;
        for row in &self.rows {
            w.write_record(row).map_err(fail)?;
        }
        w.into_inner().map_err(|e| CliError::Config(format!("CSV encoding failed: {e}")))
    }

    pub fn summary_json(&self, experiment: &str, digest: &str, config: Value) -> Vec<u8> {
        let doc = json!({
            "status": "ok",
            "experiment": experiment,
            "config_sha256": digest,
            "config": config,
            "results": self.summary,
        });
        let mut bytes = serde_json::to_vec_pretty(&doc).expect("JSON values always serialize");
        bytes.push(b'\n');
        bytes
    }
}

/// Shortest round-trip form, in scientific notation outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Write every `(path, bytes)` pair or none of them: each file is written to
/// a temporary sibling and renamed only once all of them succeeded.
pub fn write_all_or_nothing(files: &[(&Path, &[u8])]) -> CliResult<()> {
    let mut staged: Vec<(PathBuf, &Path)> = Vec::new();
    let cleanup = |staged: &[(PathBuf, &Path)]| {
        for (tmp, _) in staged {
            let _ = std::fs::remove_file(tmp);
        }
    };
    for (path, bytes) in files {
        let mut name = path.file_name().unwrap_or_default().to_os_string();
        name.push(".partial");
        let tmp = path.with_file_name(name);
        if let Err(e) = std::fs::write(&tmp, bytes) {
            cleanup(&staged);
            return Err(CliError::io(*path, e));
        }
        staged.push((tmp, path));
    }
    for (tmp, path) in &staged {
        if let Err(e) = std::fs::rename(tmp, path) {
            cleanup(&staged);
            return Err(CliError::io(*path, e));
        }
    }
    Ok(())
}
