//! Plot-ready emission: CSV tables with a comment header, and a JSON
//! envelope carrying the same numbers losslessly.
//!
//! All floating-point output is written with 17 significant digits so a
//! reader parsing the text recovers the original doubles bit-for-bit, and
//! nothing here consults the clock or any other ambient state — identical
//! inputs give byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::{Error, Result};

/// Output encoding selector shared by all emitting commands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// A rectangular block of doubles with named columns and key-value
/// metadata.  Metadata keys keep insertion order in CSV and are sorted in
/// JSON, both deterministic.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Vec<(String, String)>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// `# key = value` lines, the column header, then one line per row.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(s, "# {k} = {v}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for row in &self.rows {
            let mut first = true;
            for &x in row {
                if !first {
                    s.push(',');
                }
                let _ = write!(s, "{}", fmt_g17(x));
                first = false;
            }
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = JsonDocument {
            metadata: self.metadata.iter().cloned().collect(),
            columns: self.columns.clone(),
            rows: self.rows.clone(),
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Encode(e.to_string()))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => Ok(self.to_csv()),
            Format::Json => self.to_json(),
        }
    }

    /// Write to `path`, or to stdout when `path` is `None`.
    pub fn emit(&self, format: Format, path: Option<&Path>) -> Result<()> {
        let text = self.render(format)?;
        write_text(path, &text)
    }
}

#[derive(Serialize)]
struct JsonDocument {
    metadata: BTreeMap<String, String>,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

pub fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = File::create(p)?;
            Ok(f.write_all(text.as_bytes())?)
        }
        None => {
            let mut out = std::io::stdout().lock();
            Ok(out.write_all(text.as_bytes())?)
        }
    }
}

/// 17 significant digits in scientific form: enough that text → f64
/// round-trips exactly, few enough to stay compact.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Derive a sibling output path: `dir/stem_suffix.ext` next to `base`.
pub fn sibling(base: &Path, suffix: &str) -> std::path::PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}_{suffix}.{ext}"))
}
