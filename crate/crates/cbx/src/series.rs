//! Numeric series and histogram CSVs.
//!
//! Series files have the header `n,value` and one `index,value` line per
//! sample. Values use Rust's shortest round-trip formatting, so parsing a
//! file gives back bit-identical doubles. A non-empty series name is
//! recorded as a leading `# name` comment.

use std::fmt::Write as _;

use cbx_core::Histogram;
use thiserror::Error;

pub const SERIES_HEADER: &str = "n,value";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CsvError {
    #[error("missing `n,value` header")]
    MissingHeader,
    #[error("line {line}: {reason}")]
    BadLine { line: usize, reason: &'static str },
}

pub fn write_series_csv(name: &str, values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 24 + 16);
    if !name.is_empty() {
        let _ = writeln!(out, "# {name}");
    }
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for (n, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{n},{v}");
    }
    out
}

/// Parses a file written by [`write_series_csv`]. Indices must run 0, 1, 2, …
pub fn read_series_csv(text: &str) -> Result<Vec<f64>, CsvError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.starts_with('#'));
    match lines.next() {
        Some((_, h)) if h.trim() == SERIES_HEADER => {}
        _ => return Err(CsvError::MissingHeader),
    }
    let mut values = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (n, v) = line
            .split_once(',')
            .ok_or(CsvError::BadLine { line: line_no, reason: "expected `n,value`" })?;
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| CsvError::BadLine { line: line_no, reason: "bad index" })?;
        if n != values.len() {
            return Err(CsvError::BadLine { line: line_no, reason: "index out of sequence" });
        }
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| CsvError::BadLine { line: line_no, reason: "bad value" })?;
        values.push(v);
    }
    Ok(values)
}

/// 256 lines `value,count`, one per gray level.
pub fn write_histogram_csv(hist: &Histogram) -> String {
    let mut out = String::with_capacity(256 * 10);
    for (value, count) in hist.bins().iter().enumerate() {
        let _ = writeln!(out, "{value},{count}");
    }
    out
}
