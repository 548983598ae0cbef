//! Minimal dense real-valued tensor used for images, weights and
//! pre-activation planes. Row-major layout, `f64` storage.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(dims: &[usize]) -> Self {
        let len = dims.iter().product();
        Self {
            dims: dims.to_vec(),
            data: vec![0.0; len],
        }
    }

    pub fn from_vec(dims: &[usize], data: Vec<f64>) -> Result<Self> {
        let len: usize = dims.iter().product();
        if data.len() != len {
            return Err(Error::ShapeMismatch {
                context: "tensor data length does not match dims",
            });
        }
        Ok(Self {
            dims: dims.to_vec(),
            data,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Flat offset for a 3-d index `[c, r, col]`.
    #[inline]
    pub fn flat3(&self, c: usize, r: usize, col: usize) -> usize {
        debug_assert_eq!(self.dims.len(), 3);
        (c * self.dims[1] + r) * self.dims[2] + col
    }

    /// Value at a 3-d index; caller guarantees bounds.
    #[inline]
    pub fn at3(&self, c: usize, r: usize, col: usize) -> f64 {
        self.data[self.flat3(c, r, col)]
    }
}
