//! Count-matrix and table file I/O.
//!
//! Count matrices are delimited text (comma or tab, auto-detected): first row
//! holds sample IDs after a corner cell, first column holds feature names,
//! cells are non-negative integers.

use std::path::Path;

use nalgebra::DMatrix;

use crate::config::{CliError, CliResult};

pub struct CountFile {
    pub counts: DMatrix<u64>,
    pub feature_names: Vec<String>,
    pub sample_ids: Vec<String>,
}

pub fn read_counts(path: &Path) -> CliResult<CountFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let delim = if text.lines().next().is_some_and(|l| l.contains('\t')) { '\t' } else { ',' };
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(CliError::Usage(format!("{}: empty file", path.display())));
    };
    let header_fields: Vec<&str> = header.split(delim).collect();
    if header_fields.len() < 2 {
        return Err(CliError::Usage(format!(
            "{}:1: header must hold a corner cell plus at least one sample id",
            path.display()
        )));
    }
    let sample_ids: Vec<String> = header_fields[1..].iter().map(|s| s.trim().to_string()).collect();
    let n = sample_ids.len();

    let mut feature_names = Vec::new();
    let mut rows: Vec<u64> = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(delim).collect();
        if fields.len() != n + 1 {
            return Err(CliError::Usage(format!(
                "{}:{}: expected {} fields (name + {n} counts), got {}",
                path.display(),
                idx + 1,
                n + 1,
                fields.len()
            )));
        }
        feature_names.push(fields[0].trim().to_string());
        for (col, raw) in fields[1..].iter().enumerate() {
            let raw = raw.trim();
            let value: u64 = raw.parse().map_err(|_| {
                CliError::Usage(format!(
                    "{}:{}: column {} ('{raw}') is not a non-negative integer count",
                    path.display(),
                    idx + 1,
                    col + 2
                ))
            })?;
            rows.push(value);
        }
    }
    if feature_names.is_empty() {
        return Err(CliError::Usage(format!("{}: no data rows", path.display())));
    }
    let counts = DMatrix::from_row_iterator(feature_names.len(), n, rows);
    Ok(CountFile { counts, feature_names, sample_ids })
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

pub fn write_counts(
    path: &Path,
    counts: &DMatrix<u64>,
    feature_names: &[String],
    sample_ids: &[String],
) -> CliResult<()> {
    let mut out = String::new();
    out.push_str("feature");
    for id in sample_ids {
        out.push(',');
        out.push_str(id);
    }
    out.push('\n');
    for i in 0..counts.nrows() {
        out.push_str(&feature_names[i]);
        for j in 0..counts.ncols() {
            out.push(',');
            out.push_str(&counts[(i, j)].to_string());
        }
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn write_matrix(
    path: &Path,
    m: &DMatrix<f64>,
    row_names: &[String],
    col_names: &[String],
    corner: &str,
) -> CliResult<()> {
    let mut out = String::new();
    out.push_str(corner);
    for name in col_names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for i in 0..m.nrows() {
        out.push_str(&row_names[i]);
        for j in 0..m.ncols() {
            out.push(',');
            out.push_str(&m[(i, j)].to_string());
        }
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn ensure_out_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))
}

/// Deterministic run manifest: resolved configuration, seed, and version.
pub fn write_manifest(path: &Path, command: &str, entries: &[(String, String)]) -> CliResult<()> {
    let mut out = String::new();
    out.push_str(&format!("command = {command}\n"));
    out.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
    for (key, value) in entries {
        out.push_str(&format!("{key} = {value}\n"));
    }
    write_text(path, &out)
}
