//! Shared test support: a reference extension method built purely against
//! the public extension contract, and a brute-force oracle that re-derives
//! candidate pools and selections from scratch, independent of the library's
//! selection code.

#![allow(dead_code)]

use prunekit::{
    Amount, CustomFromMask, DType, Identity, L1Unstructured, LnStructured, Mask, NormOrder,
    ParameterStore, PruneError, PruningMethod, PruningType, RandomStructured, RandomUnstructured,
    Tensor,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

// ---------------------------------------------------------------------------
// Reference extension: prune every other currently unpruned entry
// ---------------------------------------------------------------------------

/// Prunes the candidates at even positions (0, 2, 4, ...) of the flat-order
/// enumeration of currently unpruned entries.
pub struct EveryOther;

impl PruningMethod for EveryOther {
    fn pruning_type(&self) -> PruningType {
        PruningType::Unstructured
    }

    fn compute_mask(&self, t: &Tensor, default_mask: &Mask) -> Result<Mask, PruneError> {
        if t.shape() != default_mask.shape() {
            return Err(PruneError::ShapeMismatch(
                t.shape().to_vec(),
                default_mask.shape().to_vec(),
            ));
        }
        let candidates = default_mask.kept_indices();
        Mask::with_zeroed(default_mask, candidates.into_iter().step_by(2))
    }

    fn describe(&self) -> String {
        "every_other".to_string()
    }
}

// ---------------------------------------------------------------------------
// Method specs shared by the engine and the oracle
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    One,
    Two,
    Inf,
}

impl NormKind {
    pub fn to_order(self) -> NormOrder {
        match self {
            NormKind::One => NormOrder::new(1.0).unwrap(),
            NormKind::Two => NormOrder::new(2.0).unwrap(),
            NormKind::Inf => NormOrder::INF,
        }
    }
}

#[derive(Debug, Clone)]
pub enum MethodSpec {
    Identity,
    RandomUnstructured { amount: Amount, seed: u64 },
    L1Unstructured { amount: Amount },
    RandomStructured { amount: Amount, dim: isize, seed: u64 },
    LnStructured { amount: Amount, n: NormKind, dim: isize },
    CustomFromMask { user: Vec<f64> },
    EveryOther,
}

/// Build the real method for a spec, with masks in the tensor's dtype.
pub fn build_method(
    spec: &MethodSpec,
    shape: &[usize],
    dtype: DType,
) -> Arc<dyn PruningMethod> {
    match spec {
        MethodSpec::Identity => Arc::new(Identity),
        MethodSpec::RandomUnstructured { amount, seed } => {
            Arc::new(RandomUnstructured::new(*amount, *seed))
        }
        MethodSpec::L1Unstructured { amount } => Arc::new(L1Unstructured::new(*amount)),
        MethodSpec::RandomStructured { amount, dim, seed } => {
            Arc::new(RandomStructured::new(*amount, *dim, *seed))
        }
        MethodSpec::LnStructured { amount, n, dim } => {
            Arc::new(LnStructured::new(*amount, n.to_order(), *dim))
        }
        MethodSpec::CustomFromMask { user } => {
            Arc::new(CustomFromMask::new(bits_to_mask(user, shape, dtype)))
        }
        MethodSpec::EveryOther => Arc::new(EveryOther),
    }
}

pub fn bits_to_mask(bits: &[f64], shape: &[usize], dtype: DType) -> Mask {
    let t = match dtype {
        DType::F32 => {
            Tensor::from_f32(shape.to_vec(), bits.iter().map(|&b| b as f32).collect()).unwrap()
        }
        DType::F64 => Tensor::from_f64(shape.to_vec(), bits.to_vec()).unwrap(),
    };
    Mask::from_tensor(t).unwrap()
}

pub fn tensor_from_values(values: &[f64], shape: &[usize], dtype: DType) -> Tensor {
    match dtype {
        DType::F32 => {
            Tensor::from_f32(shape.to_vec(), values.iter().map(|&v| v as f32).collect()).unwrap()
        }
        DType::F64 => Tensor::from_f64(shape.to_vec(), values.to_vec()).unwrap(),
    }
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

fn oracle_normalize_dim(dim: isize, ndim: usize) -> Result<usize, String> {
    let d = if dim < 0 { dim + ndim as isize } else { dim };
    if d < 0 || d as usize >= ndim {
        return Err(format!("dim {dim} out of range for ndim {ndim}"));
    }
    Ok(d as usize)
}

/// Flat indices of the slice at `channel` along `dim`, derived from first
/// principles with nested loops.
fn oracle_channel_indices(shape: &[usize], dim: usize, channel: usize) -> Vec<usize> {
    let outer: usize = shape[..dim].iter().product();
    let inner: usize = shape[dim + 1..].iter().product();
    let mut out = Vec::new();
    for o in 0..outer {
        for i in 0..inner {
            out.push((o * shape[dim] + channel) * inner + i);
        }
    }
    out
}

/// `floor(f * n + 0.5)` for fractions; counts must fit the pool.
fn oracle_resolve(amount: Amount, n_candidates: usize) -> Result<usize, String> {
    match amount {
        Amount::Count(k) => {
            if k > n_candidates {
                Err(format!("count {k} > {n_candidates} candidates"))
            } else {
                Ok(k)
            }
        }
        Amount::Fraction(f) => {
            if !(0.0..=1.0).contains(&f) {
                return Err(format!("fraction {f} out of range"));
            }
            Ok(((f * n_candidates as f64 + 0.5).floor() as usize).min(n_candidates))
        }
    }
}

/// Partial Fisher-Yates over `0..n` with a fresh ChaCha8 stream: the
/// documented selection procedure, re-implemented here with an independent
/// generator instance.
fn oracle_fisher_yates(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + rng.random_range(0..n - i);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

fn oracle_norm(values: &[f64], kind: NormKind) -> f64 {
    match kind {
        NormKind::One => values.iter().map(|v| v.abs()).sum(),
        NormKind::Two => values.iter().map(|v| v * v).sum::<f64>().sqrt(),
        NormKind::Inf => values.iter().fold(0.0, |m, v| m.max(v.abs())),
    }
}

/// Apply one method to an explicit 0/1 mask, recomputing candidate pools and
/// selections from scratch.
pub fn oracle_apply(
    spec: &MethodSpec,
    values: &[f64],
    shape: &[usize],
    mask: &mut [f64],
) -> Result<(), String> {
    match spec {
        MethodSpec::Identity => Ok(()),
        MethodSpec::L1Unstructured { amount } => {
            let candidates: Vec<usize> =
                (0..mask.len()).filter(|&i| mask[i] == 1.0).collect();
            let k = oracle_resolve(*amount, candidates.len())?;
            let mut scored: Vec<(f64, usize)> =
                candidates.iter().map(|&i| (values[i].abs(), i)).collect();
            scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for &(_, i) in scored.iter().take(k) {
                mask[i] = 0.0;
            }
            Ok(())
        }
        MethodSpec::RandomUnstructured { amount, seed } => {
            let candidates: Vec<usize> =
                (0..mask.len()).filter(|&i| mask[i] == 1.0).collect();
            let k = oracle_resolve(*amount, candidates.len())?;
            for c in oracle_fisher_yates(candidates.len(), k, *seed) {
                mask[candidates[c]] = 0.0;
            }
            Ok(())
        }
        MethodSpec::RandomStructured { amount, dim, seed } => {
            let d = oracle_normalize_dim(*dim, shape.len())?;
            let candidates: Vec<usize> = (0..shape[d])
                .filter(|&c| {
                    oracle_channel_indices(shape, d, c).iter().any(|&i| mask[i] == 1.0)
                })
                .collect();
            let k = oracle_resolve(*amount, candidates.len())?;
            for c in oracle_fisher_yates(candidates.len(), k, *seed) {
                for i in oracle_channel_indices(shape, d, candidates[c]) {
                    mask[i] = 0.0;
                }
            }
            Ok(())
        }
        MethodSpec::LnStructured { amount, n, dim } => {
            let d = oracle_normalize_dim(*dim, shape.len())?;
            let candidates: Vec<usize> = (0..shape[d])
                .filter(|&c| {
                    oracle_channel_indices(shape, d, c).iter().any(|&i| mask[i] == 1.0)
                })
                .collect();
            let k = oracle_resolve(*amount, candidates.len())?;
            let mut scored: Vec<(f64, usize)> = candidates
                .iter()
                .map(|&c| {
                    let slice: Vec<f64> = oracle_channel_indices(shape, d, c)
                        .iter()
                        .map(|&i| values[i] * mask[i])
                        .collect();
                    (oracle_norm(&slice, *n), c)
                })
                .collect();
            scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for &(_, c) in scored.iter().take(k) {
                for i in oracle_channel_indices(shape, d, c) {
                    mask[i] = 0.0;
                }
            }
            Ok(())
        }
        MethodSpec::CustomFromMask { user } => {
            for i in 0..mask.len() {
                mask[i] *= user[i];
            }
            Ok(())
        }
        MethodSpec::EveryOther => {
            let candidates: Vec<usize> =
                (0..mask.len()).filter(|&i| mask[i] == 1.0).collect();
            for (pos, &i) in candidates.iter().enumerate() {
                if pos % 2 == 0 {
                    mask[i] = 0.0;
                }
            }
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Randomized sequence cases
// ---------------------------------------------------------------------------

pub struct SequenceCase {
    pub shape: Vec<usize>,
    pub dtype: DType,
    /// Exact values (always representable in the case's dtype).
    pub values: Vec<f64>,
    pub methods: Vec<MethodSpec>,
    /// Oracle mask after the whole sequence.
    pub final_mask: Vec<f64>,
}

pub fn unstructured_candidates(mask: &[f64]) -> usize {
    mask.iter().filter(|&&m| m == 1.0).count()
}

pub fn structured_candidates(shape: &[usize], dim: usize, mask: &[f64]) -> usize {
    (0..shape[dim])
        .filter(|&c| oracle_channel_indices(shape, dim, c).iter().any(|&i| mask[i] == 1.0))
        .count()
}

fn random_amount(rng: &mut ChaCha8Rng, candidates: usize) -> Amount {
    if rng.random::<bool>() {
        Amount::Fraction(rng.random_range(0.0..=1.0))
    } else {
        Amount::Count(rng.random_range(0..=candidates))
    }
}

fn random_dim(rng: &mut ChaCha8Rng, ndim: usize) -> isize {
    rng.random_range(-(ndim as i64)..ndim as i64) as isize
}

fn random_spec(rng: &mut ChaCha8Rng, shape: &[usize], mask: &[f64]) -> MethodSpec {
    match rng.random_range(0u8..8) {
        0 => MethodSpec::Identity,
        1 => MethodSpec::RandomUnstructured {
            amount: random_amount(rng, unstructured_candidates(mask)),
            seed: rng.random(),
        },
        2 | 3 => MethodSpec::L1Unstructured {
            amount: random_amount(rng, unstructured_candidates(mask)),
        },
        4 => {
            let dim = random_dim(rng, shape.len());
            let d = oracle_normalize_dim(dim, shape.len()).unwrap();
            MethodSpec::RandomStructured {
                amount: random_amount(rng, structured_candidates(shape, d, mask)),
                dim,
                seed: rng.random(),
            }
        }
        5 => {
            let dim = random_dim(rng, shape.len());
            let d = oracle_normalize_dim(dim, shape.len()).unwrap();
            let n = match rng.random_range(0u8..3) {
                0 => NormKind::One,
                1 => NormKind::Two,
                _ => NormKind::Inf,
            };
            MethodSpec::LnStructured {
                amount: random_amount(rng, structured_candidates(shape, d, mask)),
                n,
                dim,
            }
        }
        6 => MethodSpec::CustomFromMask {
            user: (0..mask.len())
                .map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 })
                .collect(),
        },
        _ => MethodSpec::EveryOther,
    }
}

/// Deterministically generate one randomized sequence case: a tensor up to
/// 4x4 (values drawn from a tie-rich palette exactly representable in f32)
/// and up to 4 valid methods.
pub fn generate_case(rng: &mut ChaCha8Rng) -> SequenceCase {
    let ndim = rng.random_range(1usize..=2);
    let shape: Vec<usize> = (0..ndim).map(|_| rng.random_range(1usize..=4)).collect();
    let numel: usize = shape.iter().product();
    let dtype = if rng.random::<bool>() { DType::F32 } else { DType::F64 };
    let values: Vec<f64> = (0..numel)
        .map(|_| {
            let magnitude = rng.random_range(0u8..=8) as f64 * 0.25;
            if rng.random::<bool>() {
                magnitude
            } else {
                -magnitude
            }
        })
        .collect();
    let len = rng.random_range(1usize..=4);
    let mut mask = vec![1.0; numel];
    let mut methods = Vec::with_capacity(len);
    for _ in 0..len {
        let spec = random_spec(rng, &shape, &mask);
        oracle_apply(&spec, &values, &shape, &mut mask).expect("generated specs are valid");
        methods.push(spec);
    }
    SequenceCase { shape, dtype, values, methods, final_mask: mask }
}

/// Fresh single-parameter store for a case.
pub fn case_store(case: &SequenceCase, name: &str) -> ParameterStore {
    let mut store = ParameterStore::new();
    store
        .insert_param(name, tensor_from_values(&case.values, &case.shape, case.dtype))
        .unwrap();
    store
}
