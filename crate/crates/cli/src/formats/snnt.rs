//! SNNT binary tensor format.
//!
//! Layout: magic `SNNT`, version `u8` (currently 1), rank `u32` LE, one
//! `u32` LE per dimension, then the values as `f32` LE in row-major
//! order. Rank is capped at 8.

use std::fs;
use std::path::Path;

use spikesim_core::tensor::Tensor;

use super::ByteReader;
use crate::{CliError, Result};

pub const MAGIC: &[u8; 4] = b"SNNT";
pub const VERSION: u8 = 1;
pub const MAX_RANK: u32 = 8;

pub fn encode_tensor(t: &Tensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(9 + 4 * t.dims().len() + 4 * t.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(t.dims().len() as u32).to_le_bytes());
    for &d in t.dims() {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for &v in t.data() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn decode_tensor(bytes: &[u8]) -> Result<Tensor> {
    let mut r = ByteReader::new(bytes);
    let magic = r.take(4, "magic")?;
    if magic != MAGIC {
        return Err(CliError::Format(format!(
            "bad magic {magic:02x?}, expected \"SNNT\""
        )));
    }
    let version = r.u8("version")?;
    if version != VERSION {
        return Err(CliError::Format(format!(
            "unsupported SNNT version {version}"
        )));
    }
    let rank = r.u32("rank")?;
    if rank > MAX_RANK {
        return Err(CliError::Format(format!(
            "rank {rank} exceeds the maximum of {MAX_RANK}"
        )));
    }
    let mut dims = Vec::with_capacity(rank as usize);
    for i in 0..rank {
        dims.push(r.u32(&format!("dim {i}"))? as usize);
    }
    let count: usize = dims.iter().product();
    let mut data = Vec::with_capacity(count);
    for i in 0..count {
        data.push(f64::from(r.f32(&format!("value {i}"))?));
    }
    r.expect_end()?;
    Tensor::from_vec(&dims, data).map_err(CliError::Core)
}

pub fn write_tensor(path: &Path, t: &Tensor) -> Result<()> {
    fs::write(path, encode_tensor(t)).map_err(|e| CliError::io(path, e))
}

pub fn load_tensor(path: &Path) -> Result<Tensor> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode_tensor(&bytes).map_err(|e| match e {
        CliError::Format(msg) => CliError::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}
