//! Per-parameter and store-wide sparsity reporting.

use crate::engine::{mask_name, ParameterStore};
use serde::Serialize;

/// Sparsity of one logical parameter.
#[derive(Debug, Clone, Serialize)]
pub struct TensorSparsity {
    pub name: String,
    pub shape: Vec<usize>,
    pub elements: usize,
    pub zeros: usize,
    pub sparsity: f64,
    pub pruned: bool,
}

/// Sparsity of every logical parameter plus the element-weighted total.
#[derive(Debug, Clone, Serialize)]
pub struct SparsityReport {
    pub tensors: Vec<TensorSparsity>,
    pub total_elements: usize,
    pub total_zeros: usize,
    pub global_sparsity: f64,
}

/// Build a report over the store's logical parameters, sorted by name.
///
/// Pruned parameters count zeros in their mask; plain parameters count
/// exact-zero values.
pub fn sparsity_report(store: &ParameterStore) -> SparsityReport {
    let mut tensors = Vec::new();
    let mut total_elements = 0usize;
    let mut total_zeros = 0usize;
    for name in store.logical_param_names() {
        let pruned = store.is_parameter_pruned(&name);
        let (tensor, zeros) = if pruned {
            let mask = store.buffer(&mask_name(&name)).expect("pruned keeps _mask");
            let zeros = (0..mask.numel()).filter(|&i| mask.value(i) == 0.0).count();
            (mask, zeros)
        } else {
            let t = store.param(&name).expect("logical name resolves");
            let zeros = (0..t.numel()).filter(|&i| t.value(i) == 0.0).count();
            (t, zeros)
        };
        total_elements += tensor.numel();
        total_zeros += zeros;
        tensors.push(TensorSparsity {
            name,
            shape: tensor.shape().to_vec(),
            elements: tensor.numel(),
            zeros,
            sparsity: zeros as f64 / tensor.numel() as f64,
            pruned,
        });
    }
    let global_sparsity =
        if total_elements == 0 { 0.0 } else { total_zeros as f64 / total_elements as f64 };
    SparsityReport { tensors, total_elements, total_zeros, global_sparsity }
}
