//! Line-oriented text formats. Blank lines are skipped in the numeric
//! formats; in `string-lines` every line is a record.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spaces::{Cluster, Sequence, Signature, SparseVector, CENTROID_DIM};

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_f64(path: &Path, line: usize, tok: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_error(path, line, format!("invalid number `{tok}`")))?;
    if !v.is_finite() {
        return Err(parse_error(path, line, format!("non-finite value `{tok}`")));
    }
    Ok(v)
}

/// Non-blank lines with their 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Whitespace-separated numbers, one vector per line.
pub fn read_dense_text(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, rec) in records(&text) {
        let row = rec
            .split_whitespace()
            .map(|t| parse_f64(path, line, t))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_error(
                    path,
                    line,
                    format!("expected {} values, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_dense_text(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    out.flush()?;
    Ok(())
}

/// `index:value` pairs separated by spaces, indices strictly ascending.
pub fn read_sparse_text(path: &Path) -> Result<Vec<SparseVector>> {
    let text = fs::read_to_string(path)?;
    records(&text)
        .map(|(line, rec)| {
            let entries = rec
                .split_whitespace()
                .map(|tok| {
                    let (i, v) = tok
                        .split_once(':')
                        .ok_or_else(|| parse_error(path, line, format!("expected index:value, got `{tok}`")))?;
                    let i: u32 = i
                        .parse()
                        .map_err(|_| parse_error(path, line, format!("invalid index `{i}`")))?;
                    Ok((i, parse_f64(path, line, v)?))
                })
                .collect::<Result<Vec<_>>>()?;
            SparseVector::new(entries).map_err(|e| parse_error(path, line, e.to_string()))
        })
        .collect()
}

pub fn write_sparse_text(path: &Path, rows: &[SparseVector]) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for row in rows {
        let line: Vec<String> = row.entries().map(|(i, v)| format!("{i}:{v}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    out.flush()?;
    Ok(())
}

/// One byte string per line; a trailing `\r` is dropped.
pub fn read_string_lines(path: &Path) -> Result<Vec<Sequence>> {
    let bytes = fs::read(path)?;
    if bytes.is_empty() {
        return Ok(Vec::new());
    }
    let body = bytes.strip_suffix(b"\n").unwrap_or(&bytes);
    Ok(body
        .split(|&b| b == b'\n')
        .map(|l| Sequence(l.strip_suffix(b"\r").unwrap_or(l).to_vec()))
        .collect())
}

pub fn write_string_lines(path: &Path, rows: &[Sequence]) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for row in rows {
        if row.0.contains(&b'\n') {
            return Err(Error::invalid("sequence contains a newline"));
        }
        out.write_all(&row.0)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Cluster count `c`, then `c` groups of seven centroid coordinates and a
/// weight.
pub fn read_signature_text(path: &Path) -> Result<Vec<Signature>> {
    let text = fs::read_to_string(path)?;
    let group = CENTROID_DIM + 1;
    records(&text)
        .map(|(line, rec)| {
            let mut toks = rec.split_whitespace();
            let head = toks.next().unwrap_or_default();
            let c: usize = head
                .parse()
                .map_err(|_| parse_error(path, line, format!("invalid cluster count `{head}`")))?;
            let nums = toks.map(|t| parse_f64(path, line, t)).collect::<Result<Vec<_>>>()?;
            if nums.len() != c * group {
                return Err(parse_error(
                    path,
                    line,
                    format!("{c} clusters need {} numbers, found {}", c * group, nums.len()),
                ));
            }
            let clusters = nums
                .chunks(group)
                .map(|g| Cluster {
                    centroid: g[..CENTROID_DIM].try_into().expect("group width"),
                    weight: g[CENTROID_DIM],
                })
                .collect();
            Signature::new(clusters).map_err(|e| parse_error(path, line, e.to_string()))
        })
        .collect()
}

pub fn write_signature_text(path: &Path, rows: &[Signature]) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for sig in rows {
        let mut parts = vec![sig.clusters.len().to_string()];
        for c in &sig.clusters {
            parts.extend(c.centroid.iter().map(|v| v.to_string()));
            parts.push(c.weight.to_string());
        }
        writeln!(out, "{}", parts.join(" "))?;
    }
    out.flush()?;
    Ok(())
}
