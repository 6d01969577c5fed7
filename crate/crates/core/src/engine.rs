//! The reparametrization engine: attach pruning to a named parameter, combine
//! iterative masks, resolve effective tensors, and make pruning permanent.
//!
//! Pruning a parameter `p` renames it to `p_orig` (the unpruned values),
//! stores the computed mask as a buffer `p_mask`, and registers a hook for
//! `p`. The value any computation should use is `p_orig ⊙ p_mask`, and
//! [`ParameterStore::effective`] recomputes that product on every call, so a
//! later change to `p_orig` is reflected immediately, the moral equivalent
//! of recomputing the masked weight at the start of each forward pass.
//!
//! A parameter pruned more than once gets a [`PruningContainer`] holding the
//! methods in application order; [`combine_masks`] dictates how a new
//! method's mask folds into the existing one based on its
//! [`PruningType`](crate::methods::PruningType).
//!
//! [`ParameterStore::apply`] is atomic: it stages every mutation and commits
//! only after the mask computation succeeded, so a failed attempt leaves the
//! store exactly as it was.

use crate::error::PruneError;
use crate::mask::Mask;
use crate::methods::{
    Amount, CustomFromMask, Identity, L1Unstructured, LnStructured, PruningMethod, PruningType,
    RandomStructured, RandomUnstructured,
};
use crate::tensor::{NormOrder, Tensor};
use std::collections::BTreeMap;
use std::sync::Arc;

pub(crate) fn orig_name(name: &str) -> String {
    format!("{name}_orig")
}

pub(crate) fn mask_name(name: &str) -> String {
    format!("{name}_mask")
}

/// Ordered history of pruning methods applied to a single named tensor.
///
/// Only methods that act on the same tensor can be added.
pub struct PruningContainer {
    tensor_name: String,
    methods: Vec<Arc<dyn PruningMethod>>,
}

impl PruningContainer {
    pub fn new(tensor_name: impl Into<String>) -> Self {
        Self { tensor_name: tensor_name.into(), methods: Vec::new() }
    }

    /// Append a method that targets `tensor_name`; order is preserved.
    pub fn add(
        &mut self,
        tensor_name: &str,
        method: Arc<dyn PruningMethod>,
    ) -> Result<(), PruneError> {
        if tensor_name != self.tensor_name {
            return Err(PruneError::TensorNameMismatch {
                container: self.tensor_name.clone(),
                method: tensor_name.to_string(),
            });
        }
        self.methods.push(method);
        Ok(())
    }

    pub fn tensor_name(&self) -> &str {
        &self.tensor_name
    }

    pub fn len(&self) -> usize {
        self.methods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.methods.is_empty()
    }

    pub fn methods(&self) -> &[Arc<dyn PruningMethod>] {
        &self.methods
    }
}

enum HookMethod {
    Single(Arc<dyn PruningMethod>),
    Container(PruningContainer),
}

/// Pruning state attached to one reparametrized parameter.
pub struct PruneHook {
    tensor_name: String,
    method: HookMethod,
    record: Vec<String>,
}

impl PruneHook {
    pub fn tensor_name(&self) -> &str {
        &self.tensor_name
    }

    /// Number of methods applied so far (1 until the parameter is pruned
    /// again, at which point the hook holds a container).
    pub fn method_count(&self) -> usize {
        match &self.method {
            HookMethod::Single(_) => 1,
            HookMethod::Container(c) => c.len(),
        }
    }

    pub fn is_container(&self) -> bool {
        matches!(&self.method, HookMethod::Container(_))
    }

    pub fn container(&self) -> Option<&PruningContainer> {
        match &self.method {
            HookMethod::Single(_) => None,
            HookMethod::Container(c) => Some(c),
        }
    }

    /// Canonical text records of every method applied, oldest first.
    ///
    /// After a checkpoint reload this preserves the original history even
    /// though the live method is the stored-mask reattachment.
    pub fn record(&self) -> &[String] {
        &self.record
    }

    /// Promotion is lazy: a single method becomes a container only when a
    /// second one arrives.
    fn push_method(&mut self, method: Arc<dyn PruningMethod>) {
        match &mut self.method {
            HookMethod::Single(first) => {
                let mut container = PruningContainer::new(&self.tensor_name);
                container
                    .add(&self.tensor_name, Arc::clone(first))
                    .expect("container name matches hook");
                container.add(&self.tensor_name, method).expect("container name matches hook");
                self.method = HookMethod::Container(container);
            }
            HookMethod::Container(c) => {
                c.add(&self.tensor_name, method).expect("container name matches hook");
            }
        }
    }
}

/// Fold a new method's mask into the mask already in effect.
///
/// Dispatches on the method's `PRUNING_TYPE`:
///
/// * unstructured / structured — the method is responsible for honoring the
///   existing mask (individual entries, resp. fully-pruned channels, leave
///   the candidate pool); a mask that resurrects entries is rejected.
/// * global — the method may rank all entries regardless of earlier
///   pruning, so the result is AND-ed with `default_mask` here.
/// * anything else — rejected by name; combining such masks needs its own
///   container logic.
pub fn combine_masks(
    method: &dyn PruningMethod,
    t: &Tensor,
    default_mask: &Mask,
) -> Result<Mask, PruneError> {
    match method.pruning_type() {
        PruningType::Unstructured | PruningType::Structured => {
            let mask = method.compute_mask(t, default_mask)?;
            ensure_shape(t, &mask)?;
            for i in 0..mask.numel() {
                if mask.is_kept(i) && !default_mask.is_kept(i) {
                    return Err(PruneError::NonMonotonicMask { method: method.describe() });
                }
            }
            Ok(mask)
        }
        PruningType::Global => {
            let mask = method.compute_mask(t, default_mask)?;
            ensure_shape(t, &mask)?;
            mask.and(default_mask)
        }
        PruningType::Custom(name) => Err(PruneError::UnsupportedPruningType(name.to_string())),
    }
}

fn ensure_shape(t: &Tensor, mask: &Mask) -> Result<(), PruneError> {
    if t.shape() != mask.shape() {
        return Err(PruneError::ShapeMismatch(t.shape().to_vec(), mask.shape().to_vec()));
    }
    if t.dtype() != mask.dtype() {
        return Err(PruneError::DtypeMismatch(t.dtype(), mask.dtype()));
    }
    Ok(())
}

/// Named parameters, named buffers, and the pruning hooks attached to them;
/// the stand-in for a framework module.
///
/// A store is single-writer: concurrent `apply`/`remove` on the same store
/// must be serialized externally. Reads are safe with each other.
#[derive(Default)]
pub struct ParameterStore {
    params: BTreeMap<String, Tensor>,
    buffers: BTreeMap<String, Tensor>,
    hooks: Vec<PruneHook>,
}

impl ParameterStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register a new parameter. Names must be unique across parameters and
    /// buffers.
    pub fn insert_param(&mut self, name: impl Into<String>, t: Tensor) -> Result<(), PruneError> {
        let name = name.into();
        if name.is_empty()
            || self.params.contains_key(&name)
            || self.buffers.contains_key(&name)
        {
            return Err(PruneError::NameTaken(name));
        }
        self.params.insert(name, t);
        Ok(())
    }

    /// Replace the value of an existing parameter; shape and dtype must
    /// match the current value.
    pub fn set_param(&mut self, name: &str, t: Tensor) -> Result<(), PruneError> {
        let current = self
            .params
            .get_mut(name)
            .ok_or_else(|| PruneError::UnknownParameter(name.to_string()))?;
        if current.shape() != t.shape() {
            return Err(PruneError::ShapeMismatch(current.shape().to_vec(), t.shape().to_vec()));
        }
        if current.dtype() != t.dtype() {
            return Err(PruneError::DtypeMismatch(current.dtype(), t.dtype()));
        }
        *current = t;
        Ok(())
    }

    pub fn param(&self, name: &str) -> Option<&Tensor> {
        self.params.get(name)
    }

    pub fn buffer(&self, name: &str) -> Option<&Tensor> {
        self.buffers.get(name)
    }

    /// Raw parameter names, sorted (includes `_orig` entries of pruned
    /// parameters).
    pub fn param_names(&self) -> impl Iterator<Item = &str> {
        self.params.keys().map(String::as_str)
    }

    /// Buffer names, sorted.
    pub fn buffer_names(&self) -> impl Iterator<Item = &str> {
        self.buffers.keys().map(String::as_str)
    }

    /// Logical parameter names, sorted: live parameters under their own
    /// name, pruned parameters under their original (hook) name.
    pub fn logical_param_names(&self) -> Vec<String> {
        let orig_of_hooks: Vec<String> =
            self.hooks.iter().map(|h| orig_name(&h.tensor_name)).collect();
        let mut names: Vec<String> = self
            .params
            .keys()
            .filter(|k| !orig_of_hooks.contains(k))
            .cloned()
            .chain(self.hooks.iter().map(|h| h.tensor_name.clone()))
            .collect();
        names.sort();
        names
    }

    pub fn hooks(&self) -> &[PruneHook] {
        &self.hooks
    }

    pub fn hook(&self, name: &str) -> Option<&PruneHook> {
        self.hooks.iter().find(|h| h.tensor_name == name)
    }

    fn hook_index(&self, name: &str) -> Option<usize> {
        self.hooks.iter().position(|h| h.tensor_name == name)
    }

    /// True when any pruning hook is attached to this store.
    pub fn is_pruned(&self) -> bool {
        !self.hooks.is_empty()
    }

    pub fn is_parameter_pruned(&self, name: &str) -> bool {
        self.hook_index(name).is_some()
    }

    /// The tensor a computation should see for `name`: `orig ⊙ mask`,
    /// recomputed on every call.
    pub fn effective(&self, name: &str) -> Result<Tensor, PruneError> {
        if self.hook_index(name).is_none() {
            return Err(PruneError::NotPruned(name.to_string()));
        }
        let orig = self
            .params
            .get(&orig_name(name))
            .expect("pruned parameter keeps its _orig entry");
        let mask = self
            .buffers
            .get(&mask_name(name))
            .expect("pruned parameter keeps its _mask buffer");
        orig.hadamard(mask)
    }

    /// Apply a pruning method to the named parameter.
    ///
    /// First application reparametrizes the tensor (`name` → `name_orig` +
    /// `name_mask` + hook); repeat applications promote the hook's method to
    /// a container, fold the new mask in via [`combine_masks`], and
    /// overwrite the buffer. On any error the store is left untouched.
    pub fn apply<M: PruningMethod + 'static>(
        &mut self,
        name: &str,
        method: M,
    ) -> Result<(), PruneError> {
        self.apply_dyn(name, Arc::new(method))
    }

    pub fn apply_dyn(
        &mut self,
        name: &str,
        method: Arc<dyn PruningMethod>,
    ) -> Result<(), PruneError> {
        if let Some(idx) = self.hook_index(name) {
            // Repeat application: combine with the mask in effect.
            let orig = self
                .params
                .get(&orig_name(name))
                .expect("pruned parameter keeps its _orig entry");
            let current = Mask::from_tensor(
                self.buffers
                    .get(&mask_name(name))
                    .expect("pruned parameter keeps its _mask buffer")
                    .clone(),
            )
            .expect("stored masks are binary");
            let new_mask = combine_masks(method.as_ref(), orig, &current)?;
            // Everything past this point is infallible: commit.
            let description = method.describe();
            let hook = &mut self.hooks[idx];
            hook.push_method(method);
            hook.record.push(description);
            self.buffers.insert(mask_name(name), new_mask.into_tensor());
            Ok(())
        } else {
            let orig = self
                .params
                .get(name)
                .ok_or_else(|| PruneError::UnknownParameter(name.to_string()))?;
            for mangled in [orig_name(name), mask_name(name)] {
                if self.params.contains_key(&mangled) || self.buffers.contains_key(&mangled) {
                    return Err(PruneError::ReparamCollision {
                        name: name.to_string(),
                        taken: mangled,
                    });
                }
            }
            let mask = method.compute_mask(orig, &Mask::ones_like(orig))?;
            ensure_shape(orig, &mask)?;
            // Commit.
            let description = method.describe();
            let orig = self.params.remove(name).expect("presence checked above");
            self.params.insert(orig_name(name), orig);
            self.buffers.insert(mask_name(name), mask.into_tensor());
            self.hooks.push(PruneHook {
                tensor_name: name.to_string(),
                method: HookMethod::Single(method),
                record: vec![description],
            });
            Ok(())
        }
    }

    /// Make pruning permanent for `name`: assign `orig ⊙ mask` back to the
    /// plain parameter and drop the `_orig`/`_mask` pair and the hook. The
    /// pruning effect itself is not undone.
    pub fn remove(&mut self, name: &str) -> Result<(), PruneError> {
        let idx = self.hook_index(name).ok_or_else(|| PruneError::NotPruned(name.to_string()))?;
        let pruned = self.effective(name)?;
        self.params.remove(&orig_name(name));
        self.buffers.remove(&mask_name(name));
        self.params.insert(name.to_string(), pruned);
        self.hooks.remove(idx);
        Ok(())
    }

    /// Used by checkpoint loading to reattach pruning state verbatim.
    pub(crate) fn attach_loaded_hook(
        &mut self,
        name: &str,
        orig: Tensor,
        mask: Mask,
        record: Vec<String>,
    ) {
        self.params.insert(orig_name(name), orig);
        self.buffers.insert(mask_name(name), mask.clone().into_tensor());
        self.hooks.push(PruneHook {
            tensor_name: name.to_string(),
            method: HookMethod::Single(Arc::new(CustomFromMask::new(mask))),
            record,
        });
    }
}

// Functional interface: one call per technique, applied to a store parameter
// identified by name.

pub fn identity(store: &mut ParameterStore, name: &str) -> Result<(), PruneError> {
    store.apply(name, Identity)
}

pub fn random_unstructured(
    store: &mut ParameterStore,
    name: &str,
    amount: Amount,
    seed: u64,
) -> Result<(), PruneError> {
    store.apply(name, RandomUnstructured::new(amount, seed))
}

pub fn l1_unstructured(
    store: &mut ParameterStore,
    name: &str,
    amount: Amount,
) -> Result<(), PruneError> {
    store.apply(name, L1Unstructured::new(amount))
}

pub fn random_structured(
    store: &mut ParameterStore,
    name: &str,
    amount: Amount,
    dim: isize,
    seed: u64,
) -> Result<(), PruneError> {
    store.apply(name, RandomStructured::new(amount, dim, seed))
}

pub fn ln_structured(
    store: &mut ParameterStore,
    name: &str,
    amount: Amount,
    n: NormOrder,
    dim: isize,
) -> Result<(), PruneError> {
    store.apply(name, LnStructured::new(amount, n, dim))
}

pub fn custom_from_mask(
    store: &mut ParameterStore,
    name: &str,
    mask: Mask,
) -> Result<(), PruneError> {
    store.apply(name, CustomFromMask::new(mask))
}
