//! Mask-generating pruning techniques and the extension contract.
//!
//! Every technique implements [`PruningMethod`]: given a tensor and the mask
//! already in effect (`default_mask`), it returns the updated mask. Each
//! method carries a [`PruningType`] that tells the iterative-pruning
//! container how its candidates relate to earlier pruning:
//!
//! * `Unstructured` — individual entries already pruned are disregarded;
//!   only entries with `default_mask = 1` are candidates.
//! * `Structured` — a channel is disregarded only if *all* of its entries
//!   are already pruned; partially pruned channels stay candidates.
//! * `Global` — the method ranks all entries regardless of earlier pruning
//!   (the container still keeps previously pruned entries pruned).
//!
//! New techniques are written by implementing the trait against this public
//! surface and picking one of the types above; selection helpers such as
//! [`Mask::with_zeroed`] and [`Mask::kept_indices`] are the same primitives
//! the built-in methods use.

use crate::error::PruneError;
use crate::mask::Mask;
use crate::tensor::{normalize_dim, ChannelIndex, NormOrder, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Pruning quantity: an absolute count of entries/channels, or a fraction of
/// the currently unpruned candidates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amount {
    Count(usize),
    Fraction(f64),
}

impl Amount {
    /// Resolve against a candidate pool of size `n_candidates`.
    ///
    /// A fraction `f` resolves to `floor(f * n + 0.5)` (round half up); a
    /// count must not exceed the pool.
    pub fn resolve(&self, n_candidates: usize) -> Result<usize, PruneError> {
        match *self {
            Amount::Count(k) => {
                if k > n_candidates {
                    Err(PruneError::CountExceedsCandidates { requested: k, available: n_candidates })
                } else {
                    Ok(k)
                }
            }
            Amount::Fraction(f) => {
                if !f.is_finite() || !(0.0..=1.0).contains(&f) {
                    Err(PruneError::FractionOutOfRange(f))
                } else {
                    Ok(((f * n_candidates as f64 + 0.5).floor() as usize).min(n_candidates))
                }
            }
        }
    }
}

impl std::fmt::Display for Amount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Amount::Count(k) => write!(f, "count:{k}"),
            Amount::Fraction(x) => write!(f, "fraction:{x}"),
        }
    }
}

/// How a method's masks combine with earlier pruning of the same tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruningType {
    Unstructured,
    Structured,
    Global,
    /// A type the built-in container does not know how to combine; the name
    /// is reported when such a method is applied iteratively.
    Custom(&'static str),
}

/// Deterministic random source for the "at random" methods.
///
/// Selection of `k` distinct indices out of `n` is a partial Fisher-Yates
/// shuffle: for `i` in `0..k`, swap position `i` with position
/// `i + random_range(0..n - i)` and keep the first `k` slots. Identical
/// seeds give identical selections within one build of this crate.
pub struct RngState {
    rng: ChaCha8Rng,
}

impl RngState {
    pub fn from_seed(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Choose `k` distinct values from `0..n`, uniformly without replacement.
    pub fn choose_distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        debug_assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.rng.random_range(0..n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

/// A mask generator: the common contract of all pruning techniques.
pub trait PruningMethod: Send + Sync {
    /// How masks from this method combine with earlier pruning.
    fn pruning_type(&self) -> PruningType;

    /// Compute the updated mask for `t`, given the mask already in effect.
    ///
    /// The result must be binary, match `t`'s shape and dtype, and never
    /// resurrect entries (`output <= default_mask` elementwise) unless the
    /// method's type is [`PruningType::Global`].
    fn compute_mask(&self, t: &Tensor, default_mask: &Mask) -> Result<Mask, PruneError>;

    /// Canonical one-line text record, used in checkpoint metadata.
    fn describe(&self) -> String;

    /// Prune a standalone tensor: `t ⊙ compute_mask(t, ones)`. `t` itself is
    /// left untouched.
    fn prune(&self, t: &Tensor) -> Result<Tensor, PruneError> {
        let mask = self.compute_mask(t, &Mask::ones_like(t))?;
        t.hadamard(mask.tensor())
    }
}

fn check_pair(t: &Tensor, m: &Mask) -> Result<(), PruneError> {
    if t.shape() != m.shape() {
        return Err(PruneError::ShapeMismatch(t.shape().to_vec(), m.shape().to_vec()));
    }
    if t.dtype() != m.dtype() {
        return Err(PruneError::DtypeMismatch(t.dtype(), m.dtype()));
    }
    Ok(())
}

/// Does not prune anything; establishes the reparametrization with the
/// default mask (a mask of ones on first application).
#[derive(Debug, Clone, Default)]
pub struct Identity;

impl PruningMethod for Identity {
    fn pruning_type(&self) -> PruningType {
        PruningType::Unstructured
    }

    fn compute_mask(&self, t: &Tensor, default_mask: &Mask) -> Result<Mask, PruneError> {
        check_pair(t, default_mask)?;
        Ok(default_mask.clone())
    }

    fn describe(&self) -> String {
        "identity".to_string()
    }
}

/// Prune currently unpruned entries at random.
#[derive(Debug, Clone)]
pub struct RandomUnstructured {
    amount: Amount,
    seed: u64,
}

impl RandomUnstructured {
    pub fn new(amount: Amount, seed: u64) -> Self {
        Self { amount, seed }
    }
}

impl PruningMethod for RandomUnstructured {
    fn pruning_type(&self) -> PruningType {
        PruningType::Unstructured
    }

    fn compute_mask(&self, t: &Tensor, default_mask: &Mask) -> Result<Mask, PruneError> {
        check_pair(t, default_mask)?;
        let candidates = default_mask.kept_indices();
        let k = self.amount.resolve(candidates.len())?;
        let chosen = RngState::from_seed(self.seed).choose_distinct(candidates.len(), k);
        Mask::with_zeroed(default_mask, chosen.into_iter().map(|c| candidates[c]))
    }

    fn describe(&self) -> String {
        format!("random_unstructured(amount={},seed={})", self.amount, self.seed)
    }
}

/// Prune the currently unpruned entries with the lowest absolute magnitude.
/// Ties go to the smaller flat index.
#[derive(Debug, Clone)]
pub struct L1Unstructured {
    amount: Amount,
}

impl L1Unstructured {
    pub fn new(amount: Amount) -> Self {
        Self { amount }
    }
}

impl PruningMethod for L1Unstructured {
    fn pruning_type(&self) -> PruningType {
        PruningType::Unstructured
    }

    fn compute_mask(&self, t: &Tensor, default_mask: &Mask) -> Result<Mask, PruneError> {
        check_pair(t, default_mask)?;
        let mut candidates = default_mask.kept_indices();
        let k = self.amount.resolve(candidates.len())?;
        candidates.sort_by(|&a, &b| {
            t.value(a).abs().total_cmp(&t.value(b).abs()).then(a.cmp(&b))
        });
        Mask::with_zeroed(default_mask, candidates.into_iter().take(k))
    }

    fn describe(&self) -> String {
        format!("l1_unstructured(amount={})", self.amount)
    }
}

/// Channels along `dim` whose `default_mask` slice is not entirely zero.
fn candidate_channels(shape: &[usize], dim: usize, default_mask: &Mask) -> Vec<usize> {
    (0..shape[dim]).filter(|&c| !default_mask.channel_fully_pruned(dim, c)).collect()
}

/// Zero the whole slice of every listed channel.
fn zero_channels(
    default_mask: &Mask,
    shape: &[usize],
    dim: usize,
    channels: impl IntoIterator<Item = usize>,
) -> Result<Mask, PruneError> {
    let mut flats = Vec::new();
    for c in channels {
        flats.extend(crate::tensor::channel_flat_indices(shape, dim, c));
    }
    Mask::with_zeroed(default_mask, flats)
}

/// Prune entire currently unpruned channels along a dimension, at random.
#[derive(Debug, Clone)]
pub struct RandomStructured {
    amount: Amount,
    dim: isize,
    seed: u64,
}

impl RandomStructured {
    pub fn new(amount: Amount, dim: isize, seed: u64) -> Self {
        Self { amount, dim, seed }
    }
}

impl PruningMethod for RandomStructured {
    fn pruning_type(&self) -> PruningType {
        PruningType::Structured
    }

    fn compute_mask(&self, t: &Tensor, default_mask: &Mask) -> Result<Mask, PruneError> {
        check_pair(t, default_mask)?;
        let dim = normalize_dim(self.dim, t.ndim())?;
        let candidates = candidate_channels(t.shape(), dim, default_mask);
        let k = self.amount.resolve(candidates.len())?;
        let chosen = RngState::from_seed(self.seed).choose_distinct(candidates.len(), k);
        zero_channels(default_mask, t.shape(), dim, chosen.into_iter().map(|c| candidates[c]))
    }

    fn describe(&self) -> String {
        format!("random_structured(amount={},dim={},seed={})", self.amount, self.dim, self.seed)
    }
}

/// Prune the currently unpruned channels with the lowest L_n norm.
///
/// Norms are taken over `t ⊙ default_mask`, so entries pruned by earlier
/// unstructured passes contribute nothing to a channel's score. Ties go to
/// the smaller channel index.
#[derive(Debug, Clone)]
pub struct LnStructured {
    amount: Amount,
    n: NormOrder,
    dim: isize,
}

impl LnStructured {
    pub fn new(amount: Amount, n: NormOrder, dim: isize) -> Self {
        Self { amount, n, dim }
    }
}

impl PruningMethod for LnStructured {
    fn pruning_type(&self) -> PruningType {
        PruningType::Structured
    }

    fn compute_mask(&self, t: &Tensor, default_mask: &Mask) -> Result<Mask, PruneError> {
        check_pair(t, default_mask)?;
        let dim = normalize_dim(self.dim, t.ndim())?;
        let mut candidates = candidate_channels(t.shape(), dim, default_mask);
        let k = self.amount.resolve(candidates.len())?;
        let effective = t.hadamard(default_mask.tensor())?;
        let scores: Vec<f64> = (0..t.shape()[dim])
            .map(|c| {
                effective
                    .ln_norm_over_channel(self.n, ChannelIndex::new(dim as isize, c))
                    .expect("dim and channel validated")
            })
            .collect();
        candidates.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
        zero_channels(default_mask, t.shape(), dim, candidates.into_iter().take(k))
    }

    fn describe(&self) -> String {
        format!("ln_structured(amount={},n={},dim={})", self.amount, self.n, self.dim)
    }
}

/// Prune with a user-provided mask, applied to all entries regardless of
/// earlier pruning (the prior mask still wins via elementwise AND).
#[derive(Debug, Clone)]
pub struct CustomFromMask {
    mask: Mask,
}

impl CustomFromMask {
    pub fn new(mask: Mask) -> Self {
        Self { mask }
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }
}

impl PruningMethod for CustomFromMask {
    fn pruning_type(&self) -> PruningType {
        PruningType::Global
    }

    fn compute_mask(&self, t: &Tensor, default_mask: &Mask) -> Result<Mask, PruneError> {
        check_pair(t, default_mask)?;
        check_pair(t, &self.mask)?;
        default_mask.and(&self.mask)
    }

    fn describe(&self) -> String {
        "custom_from_mask".to_string()
    }
}
