//! Dense vectors stored as one decimal number per line.
//!
//! Blank lines and lines starting with `%` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use crate::FormatError;

pub fn read_vector(text: &str) -> Result<Vec<f64>, FormatError> {
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let value: f64 = line
            .parse()
            .map_err(|_| FormatError::parse(idx + 1, format!("expected a number, found `{line}`")))?;
        if !value.is_finite() {
            return Err(FormatError::parse(idx + 1, "non-finite value"));
        }
        values.push(value);
    }
    Ok(values)
}

pub fn read_vector_file(path: impl AsRef<Path>) -> Result<Vec<f64>, FormatError> {
    read_vector(&std::fs::read_to_string(path)?)
}

/// One value per line, shortest representation that reads back exactly.
pub fn write_vector(values: &[f64]) -> String {
    let mut out = String::new();
    for v in values {
        let _ = writeln!(out, "{v:?}");
    }
    out
}
