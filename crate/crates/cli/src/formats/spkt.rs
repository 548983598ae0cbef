//! SPKT binary spike-train format.
//!
//! Layout: magic `SPKT`, version `u8` (currently 1), then `T`, `C`, `H`,
//! `W` as `u32` LE, then one plane per RAM location in plane-address
//! order (channel-major, timesteps contiguous). Each plane is `H` rows of
//! `ceil(W / 8)` bytes; bit `(r, c)` sits in byte `r * stride + c / 8` at
//! bit position `c % 8` (LSB first). Padding bits must be zero.

use std::fs;
use std::path::Path;

use spikesim_core::bits::BitPlane;
use spikesim_core::memory::SpikeTrain;

use super::ByteReader;
use crate::{CliError, Result};

pub const MAGIC: &[u8; 4] = b"SPKT";
pub const VERSION: u8 = 1;

pub fn encode_spike_train(train: &SpikeTrain) -> Vec<u8> {
    let (t_len, c_len, h, w) = (
        train.timesteps(),
        train.channels(),
        train.height(),
        train.width(),
    );
    let stride = w.div_ceil(8);
    let mut out = Vec::with_capacity(9 + 16 + c_len * t_len * h * stride);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    for v in [t_len, c_len, h, w] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for c in 0..c_len {
        for t in 0..t_len {
            let plane = train.plane(c, t).expect("indices in range");
            for r in 0..h {
                let mut row = vec![0u8; stride];
                for col in 0..w {
                    if plane.get(r, col) {
                        row[col / 8] |= 1 << (col % 8);
                    }
                }
                out.extend_from_slice(&row);
            }
        }
    }
    out
}

pub fn decode_spike_train(bytes: &[u8]) -> Result<SpikeTrain> {
    let mut r = ByteReader::new(bytes);
    let magic = r.take(4, "magic")?;
    if magic != MAGIC {
        return Err(CliError::Format(format!(
            "bad magic {magic:02x?}, expected \"SPKT\""
        )));
    }
    let version = r.u8("version")?;
    if version != VERSION {
        return Err(CliError::Format(format!(
            "unsupported SPKT version {version}"
        )));
    }
    let t_len = r.u32("timesteps")? as usize;
    let c_len = r.u32("channels")? as usize;
    let h = r.u32("height")? as usize;
    let w = r.u32("width")? as usize;
    let stride = w.div_ceil(8);
    let mut train = SpikeTrain::new(t_len, c_len, h, w);
    for c in 0..c_len {
        for t in 0..t_len {
            let mut plane = BitPlane::new(h, w);
            for row in 0..h {
                let bytes_row = r.take(stride, &format!("plane ({c},{t}) row {row}"))?;
                for col in 0..w {
                    if (bytes_row[col / 8] >> (col % 8)) & 1 == 1 {
                        plane.set(row, col, true);
                    }
                }
                // Row padding must be zero.
                if !w.is_multiple_of(8) && bytes_row[stride - 1] >> (w % 8) != 0 {
                    return Err(CliError::Format(format!(
                        "non-zero padding bits in plane ({c},{t}) row {row}"
                    )));
                }
            }
            train.set_plane(c, t, plane).map_err(CliError::Core)?;
        }
    }
    r.expect_end()?;
    Ok(train)
}

pub fn write_spike_train(path: &Path, train: &SpikeTrain) -> Result<()> {
    fs::write(path, encode_spike_train(train)).map_err(|e| CliError::io(path, e))
}

pub fn load_spike_train(path: &Path) -> Result<SpikeTrain> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode_spike_train(&bytes)
}
