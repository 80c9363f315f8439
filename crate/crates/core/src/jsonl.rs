//! JSON Lines reading and writing shared by every file-backed stage.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// One non-blank line of a JSON Lines file, parsed or not.
#[derive(Debug)]
pub struct Line<T> {
    /// 1-based line number in the source file.
    pub number: usize,
    pub value: std::result::Result<T, String>,
}

/// Reads every non-blank line. Unreadable files are fatal; malformed lines are
/// returned as per-line errors so callers can keep going.
pub fn read_lines<T: DeserializeOwned>(path: &Path) -> Result<Vec<Line<T>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(Line {
            number: idx + 1,
            value: serde_json::from_str(&line).map_err(|e| e.to_string()),
        });
    }
    Ok(out)
}

/// Reads a file whose every line must parse; the first bad line is an error.
pub fn read_strict<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    read_lines(path)?
        .into_iter()
        .map(|line| {
            line.value.map_err(|message| Error::Parse {
                path: path.to_path_buf(),
                line: line.number,
                message,
            })
        })
        .collect()
}

/// Parses JSON Lines from an in-memory string (used for bundled defaults).
pub fn parse_str<T: DeserializeOwned>(text: &str) -> std::result::Result<Vec<T>, String> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("line {}: {e}", i + 1)))
        .collect()
}

pub fn to_string<'a, T: Serialize + 'a>(rows: impl IntoIterator<Item = &'a T>) -> String {
    let mut out = String::new();
    for row in rows {
        // Serialization of these plain data types cannot fail.
        out.push_str(&serde_json::to_string(row).expect("serializable row"));
        out.push('\n');
    }
    out
}

pub fn write<'a, T: Serialize + 'a>(path: &Path, rows: impl IntoIterator<Item = &'a T>) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for row in rows {
        serde_json::to_writer(&mut w, row).map_err(|e| Error::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
