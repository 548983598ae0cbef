//! Packed binary activation planes.
//!
//! A [`BitPlane`] is one feature map's worth of spikes for a single
//! timestep: `h * w` bits packed row-major into 64-bit words. Padding bits
//! past `h * w` in the last word are always zero, so popcounts and chunk
//! scans can run straight over the words.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// A packed `h x w` plane of spike bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitPlane {
    h: usize,
    w: usize,
    words: Vec<u64>,
}

impl BitPlane {
    /// All-zero plane.
    pub fn new(h: usize, w: usize) -> Self {
        let words = vec![0u64; (h * w).div_ceil(64)];
        Self { h, w, words }
    }

    pub fn height(&self) -> usize {
        self.h
    }

    pub fn width(&self) -> usize {
        self.w
    }

    /// Number of valid bits (`h * w`).
    pub fn bit_len(&self) -> usize {
        self.h * self.w
    }

    #[inline]
    fn index(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.h && col < self.w, "bit index out of plane");
        row * self.w + col
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        let idx = self.index(row, col);
        (self.words[idx / 64] >> (idx % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        let idx = self.index(row, col);
        let mask = 1u64 << (idx % 64);
        if value {
            self.words[idx / 64] |= mask;
        } else {
            self.words[idx / 64] &= !mask;
        }
    }

    /// Total number of set bits.
    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    /// Raw packed words (row-major bit order, LSB first).
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// True when every padding bit past `h * w` is zero.
    pub fn padding_is_zero(&self) -> bool {
        let bits = self.bit_len();
        let tail = bits % 64;
        if tail == 0 {
            return true;
        }
        match self.words.last() {
            Some(last) => last >> tail == 0,
            None => true,
        }
    }

    /// Iterate over set-bit coordinates in row-major order.
    pub fn iter_set(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.w;
        self.words
            .iter()
            .enumerate()
            .flat_map(move |(wi, &word)| SetBits::new(word).map(move |b| wi * 64 + b))
            .map(move |idx| (idx / w, idx % w))
    }

    /// Iterate over `chunk_bits`-wide slices of the plane's bitstream.
    ///
    /// `chunk_bits` must be a power of two no greater than 64 so chunks
    /// never straddle a word boundary. The final chunk is padded with
    /// zeros.
    pub fn chunks(&self, chunk_bits: usize) -> Result<impl Iterator<Item = u64> + '_> {
        if !matches!(chunk_bits, 8 | 16 | 32 | 64) {
            return Err(Error::InvalidParam {
                context: "chunk width must be 8, 16, 32 or 64 bits",
            });
        }
        let total = self.bit_len().div_ceil(chunk_bits);
        let per_word = 64 / chunk_bits;
        let mask = if chunk_bits == 64 {
            u64::MAX
        } else {
            (1u64 << chunk_bits) - 1
        };
        Ok((0..total).map(move |k| {
            let word = self.words[k / per_word];
            (word >> ((k % per_word) * chunk_bits)) & mask
        }))
    }
}

/// Iterator over the set-bit positions of one word.
struct SetBits {
    word: u64,
}

impl SetBits {
    fn new(word: u64) -> Self {
        Self { word }
    }
}

impl Iterator for SetBits {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.word == 0 {
            return None;
        }
        let bit = self.word.trailing_zeros() as usize;
        self.word &= self.word - 1;
        Some(bit)
    }
}
