//! Persistence: representation, mesh and map files, iteration logs,
//! experiment configs and versioned JSON/CSV reports.

mod config;
mod map_file;
mod mesh_file;
mod rep_file;
mod report;

pub use config::{ExperimentConfig, MeshConfig, RepSpec, Tolerances};
pub use map_file::{parse_map, read_map, write_iteration_log, write_map, MapFile};
pub use mesh_file::{parse_mesh, read_mesh, read_mesh_parts, write_mesh, MeshParts};
pub use rep_file::{format_rep, parse_rep, read_rep, write_rep, RELATOR_TOL};
pub use report::{read_json_report, write_csv_report, write_json_report, JsonReport, FORMAT_VERSION};

use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("relator residual {0:e} exceeds {RELATOR_TOL:e} (pass --allow-residual to accept)")]
    Residual(f64),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Teich(#[from] crate::teichmueller::TeichError),
    #[error(transparent)]
    Surface(#[from] crate::surface::SurfaceError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),
    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),
}

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse { line, msg: msg.into() }
}

pub(crate) fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::File { path: path.to_path_buf(), source })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| IoError::File { path: dir.to_path_buf(), source })?;
    }
    std::fs::write(path, text).map_err(|source| IoError::File { path: path.to_path_buf(), source })
}

/// Float with 17 significant digits, enough to round-trip.
pub(crate) fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

/// Non-blank, non-comment lines with 1-based line numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Check the first line is the expected versioned header.
pub(crate) fn expect_header(text: &str, header: &str) -> Result<(), IoError> {
    match text.lines().next().map(str::trim) {
        Some(h) if h == header => Ok(()),
        Some(h) => Err(parse_err(1, format!("expected header {header:?}, found {h:?}"))),
        None => Err(parse_err(1, "empty file")),
    }
}

pub(crate) fn parse_floats(line: usize, fields: &[&str], n: usize) -> Result<Vec<f64>, IoError> {
    if fields.len() != n {
        return Err(parse_err(line, format!("expected {n} numbers, found {}", fields.len())));
    }
    fields
        .iter()
        .map(|f| {
            let v: f64 = f.parse().map_err(|_| parse_err(line, format!("cannot parse number {f:?}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_err(line, format!("non-finite number {f:?}")))
            }
        })
        .collect()
}
