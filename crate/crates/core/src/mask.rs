//! Binary pruning masks.
//!
//! A mask stores 0/1 values in the *same float dtype* as the tensor it
//! masks, so applying it is a plain elementwise multiply and serialization
//! treats masks like any other tensor. Construction canonicalizes every
//! element to exactly `0.0` or `1.0`.

use crate::error::PruneError;
use crate::tensor::{channel_flat_indices, DType, Tensor};

/// Binary tensor of the same shape and dtype as the tensor it masks.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask(Tensor);

impl Mask {
    /// All-ones mask matching `t`'s shape and dtype.
    pub fn ones_like(t: &Tensor) -> Self {
        Mask(Tensor::ones(t.shape().to_vec(), t.dtype()).expect("valid tensor implies valid mask"))
    }

    /// Validate that every element of `t` is 0 or 1 and wrap it.
    ///
    /// Elements are rewritten to canonical `0.0` / `1.0` bit patterns (this
    /// folds `-0.0` to `+0.0`).
    pub fn from_tensor(t: Tensor) -> Result<Self, PruneError> {
        let mut bits = Vec::with_capacity(t.numel());
        for i in 0..t.numel() {
            let v = t.value(i);
            if v == 0.0 {
                bits.push(0.0);
            } else if v == 1.0 {
                bits.push(1.0);
            } else {
                return Err(PruneError::NonBinaryMask { index: i, value: v });
            }
        }
        Ok(Mask(rebuild(t.shape(), t.dtype(), &bits)))
    }

    /// Copy of `default` with the given flat positions forced to zero.
    pub fn with_zeroed(
        default: &Mask,
        zero_at: impl IntoIterator<Item = usize>,
    ) -> Result<Self, PruneError> {
        let mut bits: Vec<f64> = (0..default.numel()).map(|i| default.0.value(i)).collect();
        for i in zero_at {
            if i >= bits.len() {
                return Err(PruneError::IndexOutOfRange { index: i, len: bits.len() });
            }
            bits[i] = 0.0;
        }
        Ok(Mask(rebuild(default.shape(), default.dtype(), &bits)))
    }

    pub fn tensor(&self) -> &Tensor {
        &self.0
    }

    pub fn into_tensor(self) -> Tensor {
        self.0
    }

    pub fn shape(&self) -> &[usize] {
        self.0.shape()
    }

    pub fn dtype(&self) -> DType {
        self.0.dtype()
    }

    pub fn numel(&self) -> usize {
        self.0.numel()
    }

    /// True when the entry at flat index `i` is kept (mask value 1).
    pub fn is_kept(&self, i: usize) -> bool {
        self.0.value(i) == 1.0
    }

    /// Flat indices of the currently unpruned entries, ascending.
    pub fn kept_indices(&self) -> Vec<usize> {
        (0..self.numel()).filter(|&i| self.is_kept(i)).collect()
    }

    pub fn count_zeros(&self) -> usize {
        (0..self.numel()).filter(|&i| !self.is_kept(i)).count()
    }

    /// Fraction of zero entries, in `[0, 1]`.
    pub fn sparsity(&self) -> f64 {
        self.count_zeros() as f64 / self.numel() as f64
    }

    /// Elementwise AND (product of binary masks).
    pub fn and(&self, other: &Mask) -> Result<Mask, PruneError> {
        Ok(Mask(self.0.hadamard(&other.0)?))
    }

    /// True when the whole slice at `channel` along (normalized) `dim` is zero.
    pub(crate) fn channel_fully_pruned(&self, dim: usize, channel: usize) -> bool {
        channel_flat_indices(self.shape(), dim, channel).all(|i| !self.is_kept(i))
    }
}

fn rebuild(shape: &[usize], dtype: DType, bits: &[f64]) -> Tensor {
    match dtype {
        DType::F32 => {
            Tensor::from_f32(shape.to_vec(), bits.iter().map(|&b| b as f32).collect()).unwrap()
        }
        DType::F64 => Tensor::from_f64(shape.to_vec(), bits.to_vec()).unwrap(),
    }
}
