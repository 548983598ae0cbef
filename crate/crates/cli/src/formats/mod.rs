//! File formats: binary tensors (SNNT), binary spike trains (SPKT),
//! model and run-config JSON, workload-trace CSV and report IO.

pub mod config;
pub mod model;
pub mod report_io;
pub mod snnt;
pub mod spkt;
pub mod trace;

/// Little-endian byte reader with position tracking, so truncation
/// errors can name the exact offset.
pub(crate) struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    pub fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], crate::CliError> {
        if self.remaining() < n {
            return Err(crate::CliError::Format(format!(
                "truncated file: needed {n} bytes for {what} at byte offset {}, {} left",
                self.pos,
                self.remaining()
            )));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    pub fn u8(&mut self, what: &str) -> Result<u8, crate::CliError> {
        Ok(self.take(1, what)?[0])
    }

    pub fn u32(&mut self, what: &str) -> Result<u32, crate::CliError> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    pub fn f32(&mut self, what: &str) -> Result<f32, crate::CliError> {
        let b = self.take(4, what)?;
        Ok(f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    pub fn expect_end(&self) -> Result<(), crate::CliError> {
        if self.remaining() != 0 {
            return Err(crate::CliError::Format(format!(
                "{} trailing bytes at offset {}",
                self.remaining(),
                self.pos
            )));
        }
        Ok(())
    }
}
