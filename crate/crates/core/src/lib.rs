//! Framework-independent neural-network pruning over a minimal parameter
//! store.
//!
//! The crate models pruning as a reparametrization: a parameter `p` is
//! replaced by its unpruned values `p_orig` plus a binary buffer `p_mask`,
//! and the value used downstream is `p_orig ⊙ p_mask`, recomputed on every
//! read. Mask generators ([`Identity`], [`RandomUnstructured`],
//! [`L1Unstructured`], [`RandomStructured`], [`LnStructured`],
//! [`CustomFromMask`], plus anything implementing [`PruningMethod`]) can be
//! applied iteratively to the same tensor; a [`PruningContainer`] keeps the
//! history and combines masks according to each method's [`PruningType`].
//! [`global_unstructured`] pools candidates across tensors for one shared
//! magnitude ranking, [`ParameterStore::remove`] makes pruning permanent,
//! and the [`checkpoint`] module gives stores a bit-exact on-disk form.
//!
//! ```
//! use prunekit::{Amount, ParameterStore, Tensor};
//!
//! let mut store = ParameterStore::new();
//! store.insert_param("w", Tensor::from_f32(vec![4], vec![0.5, 0.125, 2.0, 0.25])?)?;
//! prunekit::l1_unstructured(&mut store, "w", Amount::Count(2))?;
//! assert_eq!(store.effective("w")?.values(), vec![0.5, 0.0, 2.0, 0.0]);
//! store.remove("w")?; // bake the zeros in
//! # Ok::<(), prunekit::PruneError>(())
//! ```

pub mod checkpoint;
pub mod engine;
mod error;
pub mod global;
pub mod mask;
pub mod methods;
pub mod report;
pub mod tensor;

pub use checkpoint::{read_checkpoint, write_checkpoint, CheckpointError, FORMAT_VERSION};
pub use engine::{
    combine_masks, custom_from_mask, identity, l1_unstructured, ln_structured,
    random_structured, random_unstructured, ParameterStore, PruneHook, PruningContainer,
};
pub use error::PruneError;
pub use global::{global_unstructured, PruneTarget};
pub use mask::Mask;
pub use methods::{
    Amount, CustomFromMask, Identity, L1Unstructured, LnStructured, PruningMethod, PruningType,
    RandomStructured, RandomUnstructured, RngState,
};
pub use report::{sparsity_report, SparsityReport, TensorSparsity};
pub use tensor::{ChannelIndex, DType, NormOrder, Tensor};
