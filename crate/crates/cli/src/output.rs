//! CSV and JSON emission. Every file starts with a `#` line holding JSON
//! metadata; numbers are written with 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

pub const TOOL: &str = "nagumo";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Formats `x` with 17 significant digits; non-finite values become empty cells.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Metadata common to every artifact.
pub fn metadata(config: &Value, extra: Value) -> Value {
    json!({ "tool": TOOL, "version": VERSION, "config": config, "meta": extra })
}

pub struct Table {
    path: PathBuf,
    out: BufWriter<File>,
    columns: usize,
}

impl Table {
    pub fn create(dir: &Path, name: &str, meta: &Value, columns: &[&str]) -> std::io::Result<Self> {
        let path = dir.join(name);
        let mut out = BufWriter::new(File::create(&path)?);
        writeln!(out, "# {meta}")?;
        writeln!(out, "{}", columns.join(","))?;
        Ok(Self { path, out, columns: columns.len() })
    }

    pub fn row(&mut self, cells: &[String]) -> std::io::Result<()> {
        debug_assert_eq!(cells.len(), self.columns, "row width in {}", self.path.display());
        writeln!(self.out, "{}", cells.join(","))
    }

    pub fn finish(mut self) -> std::io::Result<PathBuf> {
        self.out.flush()?;
        Ok(self.path)
    }
}

/// Writes `value` (with metadata merged in under `"metadata"`) as pretty JSON.
pub fn write_json(dir: &Path, name: &str, meta: &Value, value: Value) -> std::io::Result<PathBuf> {
    let path = dir.join(name);
    let mut doc = json!({ "metadata": meta });
    if let (Some(d), Value::Object(v)) = (doc.as_object_mut(), value) {
        d.extend(v);
    }
    let mut text = serde_json::to_string_pretty(&doc).expect("json serializes");
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}
