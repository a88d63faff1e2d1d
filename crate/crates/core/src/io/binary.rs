//! Dense binary vectors: a little-endian header `{magic, version, count,
//! dim}` followed by `count × dim` row-major `f32` values.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const DENSE_MAGIC: [u8; 4] = *b"PKDV";
pub const DENSE_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 8;

fn format_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Values are narrowed to `f32`; vectors already representable in `f32`
/// round-trip exactly.
pub fn write_dense_binary(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let dim = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::invalid("rows differ in dimension"));
    }
    let mut out = BufWriter::new(fs::File::create(path)?);
    out.write_all(&DENSE_MAGIC)?;
    out.write_all(&DENSE_VERSION.to_le_bytes())?;
    out.write_all(&(rows.len() as u64).to_le_bytes())?;
    out.write_all(&(dim as u64).to_le_bytes())?;
    for row in rows {
        for &v in row {
            if !v.is_finite() {
                return Err(Error::invalid(format!("non-finite value {v}")));
            }
            out.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_dense_binary(path: &Path) -> Result<Vec<Vec<f64>>> {
    let bytes = fs::read(path)?;
    if bytes.len() < HEADER_LEN {
        return Err(format_error(path, "truncated header"));
    }
    if bytes[..4] != DENSE_MAGIC {
        return Err(format_error(path, "not a dense binary file (bad magic)"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != DENSE_VERSION {
        return Err(format_error(
            path,
            format!("unsupported version {version}, expected {DENSE_VERSION}"),
        ));
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let dim = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
    let expected = count
        .checked_mul(dim)
        .and_then(|v| v.checked_mul(4))
        .and_then(|v| v.checked_add(HEADER_LEN))
        .ok_or_else(|| format_error(path, "header sizes overflow"))?;
    if bytes.len() != expected {
        return Err(format_error(
            path,
            format!("expected {expected} bytes for {count} x {dim}, found {}", bytes.len()),
        ));
    }
    let body = &bytes[HEADER_LEN..];
    (0..count)
        .map(|r| {
            let row: Vec<f64> = body[r * dim * 4..(r + 1) * dim * 4]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
                .collect();
            if row.iter().any(|v| !v.is_finite()) {
                return Err(format_error(path, format!("record {r} contains a non-finite value")));
            }
            Ok(row)
        })
        .collect()
}
