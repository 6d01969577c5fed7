//! Global pruning: pool entries across tensors and prune by one shared
//! magnitude ranking.

use crate::error::PruneError;
use crate::mask::Mask;
use crate::methods::{Amount, CustomFromMask};
use crate::engine::{mask_name, orig_name, ParameterStore};
use crate::tensor::Tensor;

/// One store and the parameters in it that join the global pool.
///
/// Listing order matters: it is the tie-break order for equal magnitudes.
pub struct PruneTarget<'a> {
    pub store: &'a mut ParameterStore,
    pub names: Vec<String>,
}

impl<'a> PruneTarget<'a> {
    pub fn new(store: &'a mut ParameterStore, names: Vec<String>) -> Self {
        Self { store, names }
    }

    pub fn single(store: &'a mut ParameterStore, name: impl Into<String>) -> Self {
        Self { store, names: vec![name.into()] }
    }
}

struct PoolEntry {
    score: f64,
    target: usize,
    name: usize,
    flat: usize,
}

/// Prune the `amount` pooled entries of smallest absolute magnitude across
/// all target parameters.
///
/// The pool holds every entry whose current mask value is 1 (everything, for
/// unpruned parameters); already-pruned entries never re-enter it. Ties are
/// broken toward the earlier target in the list, then the smaller flat
/// index. Each target parameter then receives the resulting per-tensor mask
/// through the standard apply path (as a stored-mask method), so exactly
/// `amount` entries are newly pruned in total.
pub fn global_unstructured(
    targets: &mut [PruneTarget<'_>],
    amount: Amount,
) -> Result<(), PruneError> {
    if targets.is_empty() || targets.iter().all(|t| t.names.is_empty()) {
        return Err(PruneError::NoTargets);
    }

    // Validate every name up front; nothing is mutated on error.
    for target in targets.iter() {
        for name in &target.names {
            if !target.store.is_parameter_pruned(name) && target.store.param(name).is_none() {
                return Err(PruneError::UnknownParameter(name.clone()));
            }
        }
    }

    let mut pool: Vec<PoolEntry> = Vec::new();
    for (ti, target) in targets.iter().enumerate() {
        for (ni, name) in target.names.iter().enumerate() {
            let (values, candidate): (&Tensor, Option<&Tensor>) =
                if target.store.is_parameter_pruned(name) {
                    (
                        target.store.param(&orig_name(name)).expect("pruned keeps _orig"),
                        Some(target.store.buffer(&mask_name(name)).expect("pruned keeps _mask")),
                    )
                } else {
                    (target.store.param(name).expect("validated above"), None)
                };
            for flat in 0..values.numel() {
                let unpruned = candidate.is_none_or(|m| m.value(flat) == 1.0);
                if unpruned {
                    pool.push(PoolEntry {
                        score: values.value(flat).abs(),
                        target: ti,
                        name: ni,
                        flat,
                    });
                }
            }
        }
    }

    let k = amount.resolve(pool.len())?;
    pool.sort_by(|a, b| {
        a.score
            .total_cmp(&b.score)
            .then(a.target.cmp(&b.target))
            .then(a.name.cmp(&b.name))
            .then(a.flat.cmp(&b.flat))
    });

    let mut selected: Vec<Vec<Vec<usize>>> =
        targets.iter().map(|t| vec![Vec::new(); t.names.len()]).collect();
    for entry in pool.into_iter().take(k) {
        selected[entry.target][entry.name].push(entry.flat);
    }

    for (ti, target) in targets.iter_mut().enumerate() {
        for (ni, name) in target.names.clone().iter().enumerate() {
            let shape_source = if target.store.is_parameter_pruned(name) {
                target.store.param(&orig_name(name)).expect("pruned keeps _orig")
            } else {
                target.store.param(name).expect("validated above")
            };
            let user_mask =
                Mask::with_zeroed(&Mask::ones_like(shape_source), selected[ti][ni].iter().copied())?;
            target.store.apply(name, CustomFromMask::new(user_mask))?;
        }
    }
    Ok(())
}
