//! Deterministic CSV assembly.
//!
//! Floats are rendered with Rust's shortest round-trip formatting and NaN as
//! `nan`, so identical inputs produce byte-identical files. Every document
//! starts with `#`-prefixed provenance lines echoing the resolved parameters
//! that produced it, which is enough to re-run the computation.

use std::path::Path;

use crate::Result;

/// Shortest round-trip decimal; `nan` for NaN, `inf`/`-inf` for infinities.
/// Magnitudes outside [1e-6, 1e15) switch to scientific notation to keep
/// cells readable; both forms parse back to the identical bits.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else if x != 0.0 && !(1e-6..1e15).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// An in-memory CSV document with a provenance header.
#[derive(Debug, Clone, Default)]
pub struct CsvDoc {
    provenance: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvDoc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn provenance(&mut self, key: &str, value: impl AsRef<str>) -> &mut Self {
        self.provenance.push((key.to_string(), value.as_ref().to_string()));
        self
    }

    pub fn provenance_f64(&mut self, key: &str, value: f64) -> &mut Self {
        self.provenance(key, fmt_float(value))
    }

    pub fn header(&mut self, columns: impl IntoIterator<Item = impl Into<String>>) -> &mut Self {
        self.header = columns.into_iter().map(Into::into).collect();
        self
    }

    pub fn row(&mut self, cells: impl IntoIterator<Item = String>) -> &mut Self {
        self.rows.push(cells.into_iter().collect());
        self
    }

    pub fn row_f64(&mut self, cells: impl IntoIterator<Item = f64>) -> &mut Self {
        self.rows.push(cells.into_iter().map(fmt_float).collect());
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.provenance {
            out.push_str("# ");
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Writes content atomically: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let file_name = path
        .file_name()
        .map(|f| f.to_string_lossy().to_string())
        .unwrap_or_else(|| "out".to_string());
    let tmp = dir.join(format!(".{file_name}.tmp"));
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
