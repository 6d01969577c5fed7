//! Dense row-major tensors and the shape arithmetic the pruning methods build on.
//!
//! Tensors are immutable values: every operation returns a fresh tensor, so
//! they can be shared freely across threads for concurrent reads. Data is
//! stored flat in row-major order; all tie-breaking in the selection code
//! elsewhere is defined in terms of this flat index. Elements are either
//! `f32` or `f64` (`f32` is the conventional default for weights); the two
//! never mix implicitly.

use crate::error::PruneError;
use std::fmt;

/// Element type of a [`Tensor`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DType {
    F32,
    F64,
}

impl DType {
    /// Size of one element in bytes.
    pub fn size(self) -> usize {
        match self {
            DType::F32 => 4,
            DType::F64 => 8,
        }
    }

    /// Tag used in checkpoint headers.
    pub fn tag(self) -> &'static str {
        match self {
            DType::F32 => "F32",
            DType::F64 => "F64",
        }
    }

    /// Inverse of [`DType::tag`].
    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "F32" => Some(DType::F32),
            "F64" => Some(DType::F64),
            _ => None,
        }
    }
}

impl fmt::Display for DType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Data {
    F32(Vec<f32>),
    F64(Vec<f64>),
}

/// Dense row-major numeric array; the unit of pruning.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Data,
}

fn check_shape(shape: &[usize]) -> Result<usize, PruneError> {
    if shape.is_empty() || shape.contains(&0) {
        return Err(PruneError::InvalidShape(shape.to_vec()));
    }
    Ok(shape.iter().product())
}

impl Tensor {
    pub fn from_f32(shape: impl Into<Vec<usize>>, data: Vec<f32>) -> Result<Self, PruneError> {
        let shape = shape.into();
        let numel = check_shape(&shape)?;
        if data.len() != numel {
            return Err(PruneError::DataLength { expected: numel, got: data.len() });
        }
        Ok(Self { shape, data: Data::F32(data) })
    }

    pub fn from_f64(shape: impl Into<Vec<usize>>, data: Vec<f64>) -> Result<Self, PruneError> {
        let shape = shape.into();
        let numel = check_shape(&shape)?;
        if data.len() != numel {
            return Err(PruneError::DataLength { expected: numel, got: data.len() });
        }
        Ok(Self { shape, data: Data::F64(data) })
    }

    /// Tensor filled with a single value.
    pub fn full(shape: impl Into<Vec<usize>>, dtype: DType, value: f64) -> Result<Self, PruneError> {
        let shape = shape.into();
        let numel = check_shape(&shape)?;
        let data = match dtype {
            DType::F32 => Data::F32(vec![value as f32; numel]),
            DType::F64 => Data::F64(vec![value; numel]),
        };
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: impl Into<Vec<usize>>, dtype: DType) -> Result<Self, PruneError> {
        Self::full(shape, dtype, 0.0)
    }

    pub fn ones(shape: impl Into<Vec<usize>>, dtype: DType) -> Result<Self, PruneError> {
        Self::full(shape, dtype, 1.0)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    /// Total number of elements.
    pub fn numel(&self) -> usize {
        match &self.data {
            Data::F32(v) => v.len(),
            Data::F64(v) => v.len(),
        }
    }

    pub fn dtype(&self) -> DType {
        match &self.data {
            Data::F32(_) => DType::F32,
            Data::F64(_) => DType::F64,
        }
    }

    /// Element at a flat index, widened to `f64` (exact for both dtypes).
    ///
    /// Panics if `i` is out of bounds, like slice indexing.
    pub fn value(&self, i: usize) -> f64 {
        match &self.data {
            Data::F32(v) => v[i] as f64,
            Data::F64(v) => v[i],
        }
    }

    /// All elements widened to `f64`, in flat row-major order.
    pub fn values(&self) -> Vec<f64> {
        match &self.data {
            Data::F32(v) => v.iter().map(|&x| x as f64).collect(),
            Data::F64(v) => v.clone(),
        }
    }

    /// Raw little-endian element bytes, in flat row-major order.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        match &self.data {
            Data::F32(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
            Data::F64(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
        }
    }

    /// Rebuild a tensor from the little-endian byte layout of [`Tensor::to_le_bytes`].
    pub fn from_le_bytes(
        shape: impl Into<Vec<usize>>,
        dtype: DType,
        bytes: &[u8],
    ) -> Result<Self, PruneError> {
        let shape = shape.into();
        let numel = check_shape(&shape)?;
        if bytes.len() != numel * dtype.size() {
            return Err(PruneError::DataLength {
                expected: numel * dtype.size(),
                got: bytes.len(),
            });
        }
        let data = match dtype {
            DType::F32 => Data::F32(
                bytes
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
            ),
            DType::F64 => Data::F64(
                bytes
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
            ),
        };
        Ok(Self { shape, data })
    }

    /// Elementwise product with a tensor of identical shape and dtype.
    ///
    /// Multiplication happens in the native element type, so `t.hadamard(m)`
    /// with a binary `m` reproduces every surviving element bit-exactly.
    pub fn hadamard(&self, other: &Tensor) -> Result<Tensor, PruneError> {
        if self.shape != other.shape {
            return Err(PruneError::ShapeMismatch(self.shape.clone(), other.shape.clone()));
        }
        match (&self.data, &other.data) {
            (Data::F32(a), Data::F32(b)) => Ok(Tensor {
                shape: self.shape.clone(),
                data: Data::F32(a.iter().zip(b).map(|(x, y)| x * y).collect()),
            }),
            (Data::F64(a), Data::F64(b)) => Ok(Tensor {
                shape: self.shape.clone(),
                data: Data::F64(a.iter().zip(b).map(|(x, y)| x * y).collect()),
            }),
            _ => Err(PruneError::DtypeMismatch(self.dtype(), other.dtype())),
        }
    }

    /// L_n norm of the channel slice selected by `c`, accumulated in `f64`.
    ///
    /// The slice is visited in ascending flat-index order. `n = 1`, `n = 2`
    /// and infinity take the obvious exact paths (sum of absolutes, sqrt of
    /// sum of squares, max absolute); other positive orders go through
    /// `(sum |x|^n)^(1/n)`.
    pub fn ln_norm_over_channel(&self, n: NormOrder, c: ChannelIndex) -> Result<f64, PruneError> {
        let (dim, channel) = c.resolve(&self.shape)?;
        let order = n.get();
        if n.is_inf() {
            let mut max = 0.0f64;
            for i in channel_flat_indices(&self.shape, dim, channel) {
                max = max.max(self.value(i).abs());
            }
            return Ok(max);
        }
        let mut acc = 0.0f64;
        if order == 1.0 {
            for i in channel_flat_indices(&self.shape, dim, channel) {
                acc += self.value(i).abs();
            }
            Ok(acc)
        } else if order == 2.0 {
            for i in channel_flat_indices(&self.shape, dim, channel) {
                let v = self.value(i);
                acc += v * v;
            }
            Ok(acc.sqrt())
        } else {
            for i in channel_flat_indices(&self.shape, dim, channel) {
                acc += self.value(i).abs().powf(order);
            }
            Ok(acc.powf(1.0 / order))
        }
    }
}

/// Norm order for structured pruning: any positive real, or infinity (max norm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormOrder(f64);

impl NormOrder {
    pub const INF: NormOrder = NormOrder(f64::INFINITY);

    /// Rejects zero, negative, and NaN orders.
    pub fn new(n: f64) -> Result<Self, PruneError> {
        if n.is_nan() || n <= 0.0 {
            return Err(PruneError::InvalidNormOrder(n));
        }
        Ok(Self(n))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_inf(self) -> bool {
        self.0.is_infinite()
    }
}

impl fmt::Display for NormOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_inf() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// One channel of a tensor: a dimension (negative counts from the back, as in
/// `ndim + dim`) plus an index along it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelIndex {
    pub dim: isize,
    pub channel: usize,
}

impl ChannelIndex {
    pub fn new(dim: isize, channel: usize) -> Self {
        Self { dim, channel }
    }

    /// Normalize against a concrete shape, returning `(dim, channel)` with
    /// `dim` in `[0, ndim)`.
    pub fn resolve(&self, shape: &[usize]) -> Result<(usize, usize), PruneError> {
        let dim = normalize_dim(self.dim, shape.len())?;
        if self.channel >= shape[dim] {
            return Err(PruneError::ChannelOutOfRange { channel: self.channel, extent: shape[dim] });
        }
        Ok((dim, self.channel))
    }
}

/// Map a possibly-negative dimension index into `[0, ndim)`.
pub fn normalize_dim(dim: isize, ndim: usize) -> Result<usize, PruneError> {
    let resolved = if dim < 0 { dim + ndim as isize } else { dim };
    if resolved < 0 || resolved as usize >= ndim {
        return Err(PruneError::DimOutOfRange { dim, ndim });
    }
    Ok(resolved as usize)
}

/// Flat indices of the slice at `channel` along `dim`, ascending.
///
/// `dim` must already be normalized and in range.
pub(crate) fn channel_flat_indices(
    shape: &[usize],
    dim: usize,
    channel: usize,
) -> impl Iterator<Item = usize> {
    let inner: usize = shape[dim + 1..].iter().product();
    let outer: usize = shape[..dim].iter().product();
    let dim_extent = shape[dim];
    (0..outer).flat_map(move |o| {
        let base = (o * dim_extent + channel) * inner;
        base..base + inner
    })
}
