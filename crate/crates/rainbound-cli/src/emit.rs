//! CSV/JSON emission with full-precision, byte-deterministic output.

use crate::{CliError, CliResult};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// One output cell: shortest round-trip decimal for floats.
#[derive(Debug, Clone)]
pub enum Cell {
    F(f64),
    U(u64),
    S(String),
    B(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // Rust's float Display is the shortest representation that
            // parses back to the identical bits.
            Cell::F(v) => format!("{v}"),
            Cell::U(v) => format!("{v}"),
            Cell::S(s) => s.clone(),
            Cell::B(b) => format!("{b}"),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::U(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}

/// Write a CSV with a unit-annotated header row. Returns the file name.
pub fn write_csv(
    out_dir: &Path,
    name: &str,
    header: &[&str],
    rows: &[Vec<Cell>],
) -> CliResult<String> {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len(), "row width mismatch in {name}");
        let mut first = true;
        for cell in row {
            if !first {
                text.push(',');
            }
            first = false;
            let _ = write!(text, "{}", cell.render());
        }
        text.push('\n');
    }
    write_file(out_dir, name, text.as_bytes())
}

pub fn write_json(out_dir: &Path, name: &str, value: &serde_json::Value) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("json encode {name}: {e}")))?;
    text.push('\n');
    write_file(out_dir, name, text.as_bytes())
}

fn write_file(out_dir: &Path, name: &str, bytes: &[u8]) -> CliResult<String> {
    let path: PathBuf = out_dir.join(name);
    std::fs::write(&path, bytes)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(name.to_string())
}
