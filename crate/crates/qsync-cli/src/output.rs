//! Dataset and metadata serialization.
//!
//! Every file is written whole-file atomically (temp file + rename) so a
//! crashed run never leaves a truncated artifact. CSV numbers carry 17
//! significant digits, enough to reconstruct the exact f64 bits; JSON goes
//! through serde_json's shortest round-trip form. Neither format embeds
//! timestamps or environment detail, so identical runs produce identical
//! bytes.

use std::fs;
use std::path::{Path, PathBuf};

use qsync::error::{Error, Result};

use crate::config::OutputFormat;

/// A named table of f64 columns, the common currency of every subcommand.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// File stem; the extension follows the output format.
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, columns: Vec<&'static str>) -> Self {
        Dataset {
            name: name.into(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Write under `dir`, returning the final path.
    pub fn write(&self, dir: &Path, format: OutputFormat) -> Result<PathBuf> {
        let path = dir.join(format!("{}.{}", self.name, format.extension()));
        let bytes = match format {
            OutputFormat::Csv => self.to_csv().into_bytes(),
            OutputFormat::Json => {
                let value = serde_json::json!({
                    "name": self.name,
                    "columns": self.columns,
                    "rows": self.rows,
                });
                to_pretty_bytes(&value)
            }
        };
        write_atomic(&path, &bytes)?;
        Ok(path)
    }

    fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * self.columns.len() * 24);
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for &v in row {
                if !first {
                    out.push(',');
                }
                out.push_str(&format_f64(v));
                first = false;
            }
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits: lossless for f64.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serialize a metadata value to `<dir>/<name>.json`.
pub fn write_metadata(dir: &Path, name: &str, value: &serde_json::Value) -> Result<PathBuf> {
    let path = dir.join(format!("{name}.json"));
    write_atomic(&path, &to_pretty_bytes(value))?;
    Ok(path)
}

fn to_pretty_bytes(value: &serde_json::Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("json serialization is infallible");
    bytes.push(b'\n');
    bytes
}

/// Whole-file atomic write: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)
        .map_err(|e| Error::invalid(format!("cannot create {}: {e}", dir.display())))?;
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)
        .map_err(|e| Error::invalid(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path)
        .map_err(|e| Error::invalid(format!("cannot move {} into place: {e}", tmp.display())))?;
    Ok(())
}
