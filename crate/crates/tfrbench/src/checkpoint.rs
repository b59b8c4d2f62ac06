//! NNCK checkpoints: magic `NNCK`, the SHA-256 digest of the model
//! configuration, a `u32` tensor count, then for every tensor its name
//! length, UTF-8 name, rank, `u32` dimensions and `f32` values (all
//! little-endian).

use std::path::Path;

use sha2::{Digest, Sha256};
use tfrbench_core::nn::{ModelConfig, Network, Param, ParamSet};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"NNCK";

/// Canonical text form of everything that determines the parameter layout
/// and the loss.
pub fn config_fingerprint(cfg: &ModelConfig, rows: usize, cols: usize) -> String {
    let stages: Vec<String> = cfg
        .stages
        .iter()
        .map(|s| format!("{}:{}x{}:{}", s.channels, s.pool.0, s.pool.1, s.dropout))
        .collect();
    format!(
        "arch={};filter={};input={rows}x{cols};stages={};dense={};dropout={:?};l2={:?};classes={}",
        cfg.architecture.name(),
        cfg.filter.name(),
        stages.join(","),
        cfg.dense_units,
        cfg.dropout,
        cfg.l2,
        cfg.n_classes
    )
}

pub fn config_digest(net: &Network) -> [u8; 32] {
    let (rows, cols) = net.input_shape();
    Sha256::digest(config_fingerprint(net.config(), rows, cols).as_bytes()).into()
}

pub fn encode(net: &Network, params: &ParamSet) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&config_digest(net));
    out.extend_from_slice(&(params.len() as u32).to_le_bytes());
    for p in params.iter() {
        out.extend_from_slice(&(p.name.len() as u32).to_le_bytes());
        out.extend_from_slice(p.name.as_bytes());
        out.extend_from_slice(&(p.shape.len() as u32).to_le_bytes());
        for &d in &p.shape {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in &p.data {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::format(self.path, "truncated checkpoint"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }
}

/// Parses a checkpoint and checks it was written for `net`.
pub fn decode(bytes: &[u8], net: &Network, path: &Path) -> Result<ParamSet> {
    let mut c = Cursor { bytes, pos: 0, path };
    if c.take(4)? != MAGIC {
        return Err(Error::format(path, "bad magic (not an NNCK checkpoint)"));
    }
    if c.take(32)? != config_digest(net) {
        return Err(Error::format(path, "checkpoint was written for a different model configuration"));
    }
    let template = net.init_params(0, 0.05);
    let count = c.u32()?;
    if count != template.len() {
        return Err(Error::format(path, format!("{count} tensors, expected {}", template.len())));
    }
    let mut params = Vec::with_capacity(count);
    for expected in template.iter() {
        let name_len = c.u32()?;
        let name = std::str::from_utf8(c.take(name_len)?)
            .map_err(|_| Error::format(path, "tensor name is not UTF-8"))?
            .to_string();
        let rank = c.u32()?;
        let shape = (0..rank).map(|_| c.u32()).collect::<Result<Vec<_>>>()?;
        if name != expected.name || shape != expected.shape {
            return Err(Error::format(
                path,
                format!("tensor `{name}` {shape:?} where `{}` {:?} was expected", expected.name, expected.shape),
            ));
        }
        let n: usize = shape.iter().product();
        let data: Vec<f64> = c
            .take(4 * n)?
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
            .collect();
        params.push(Param {
            name,
            shape,
            data,
            is_weight: expected.is_weight,
        });
    }
    if c.pos != bytes.len() {
        return Err(Error::format(path, "trailing bytes after the last tensor"));
    }
    Ok(ParamSet::new(params))
}

pub fn save(path: &Path, net: &Network, params: &ParamSet) -> Result<()> {
    std::fs::write(path, encode(net, params)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path, net: &Network) -> Result<ParamSet> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, net, path)
}
