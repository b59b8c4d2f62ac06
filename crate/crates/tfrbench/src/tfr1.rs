//! The TFR1 feature file: magic `TFR1`, little-endian `u32` rows, cols and
//! kind tag, then `rows * cols` row-major `f32` values.

use std::path::Path;

use tfrbench_core::feature::FeatureImage;
use tfrbench_core::{Matrix, TfKind};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"TFR1";
const HEADER_LEN: usize = 16;

pub fn encode(img: &FeatureImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * img.values.as_slice().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(img.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(img.cols() as u32).to_le_bytes());
    out.extend_from_slice(&img.kind.tag().to_le_bytes());
    for &v in img.values.as_slice() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

/// Parses TFR1 bytes; `path` is only used in error messages.
pub fn decode(bytes: &[u8], path: &Path) -> Result<FeatureImage> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(path, "truncated TFR1 header"));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::format(path, "bad magic (not a TFR1 feature file)"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap());
    let (rows, cols, tag) = (word(1) as usize, word(2) as usize, word(3));
    let kind = TfKind::from_tag(tag)
        .ok_or_else(|| Error::format(path, format!("unknown representation tag {tag}")))?;
    if rows == 0 || cols == 0 {
        return Err(Error::format(path, "empty image"));
    }
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::format(path, "image dimensions overflow"))?;
    if bytes.len() != expected {
        return Err(Error::format(
            path,
            format!("expected {expected} bytes for {rows}x{cols}, found {}", bytes.len()),
        ));
    }
    let values: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    if values.iter().any(|v| !v.is_finite() || v.abs() > 1.0) {
        return Err(Error::format(path, "values outside [-1, 1]"));
    }
    Ok(FeatureImage {
        values: Matrix::from_vec(rows, cols, values),
        kind,
    })
}

pub fn write(path: &Path, img: &FeatureImage) -> Result<()> {
    std::fs::write(path, encode(img)).map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path) -> Result<FeatureImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}
