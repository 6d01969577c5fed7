//! Bit-exact checkpoint format for parameter stores (extension `.pkt`).
//!
//! File layout:
//!
//! ```text
//!   [8 bytes: LE u64 header length N]
//!   [N bytes: canonical JSON header, keys sorted lexicographically]
//!   [payload: raw little-endian tensor data]
//! ```
//!
//! The header maps each tensor name to
//! `{"data_offsets":[begin,end],"dtype":"F32"|"F64","shape":[..]}` with
//! offsets relative to the start of the payload, plus a `"__metadata__"`
//! object of string keys and values. Byte ranges appear in sorted-name
//! order, ascending and exactly tiling the payload.
//!
//! A pruned parameter `p` is stored as its `p_orig` tensor plus its `p_mask`
//! buffer, and the metadata key `prune.<p>` records the applied method
//! history as `;`-joined canonical records. On load every such pair is
//! reattached as a pruned parameter using the stored mask (the mask, not the
//! history, is the ground truth of pruning state), so `effective(p)` works
//! immediately; the history record is carried through verbatim. Writing a
//! store twice yields byte-identical files, and so does writing, reading,
//! and writing again.

use crate::engine::ParameterStore;
use crate::error::PruneError;
use crate::mask::Mask;
use crate::tensor::{DType, Tensor};
use serde_json::Value;
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

/// Value of the `format_version` metadata key written by this crate.
pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("unknown dtype tag {0:?}")]
    UnknownDtype(String),

    #[error("invalid payload offsets: {0}")]
    InvalidOffsets(String),

    #[error("payload truncated: ranges need {expected} bytes, found {actual}")]
    TruncatedPayload { expected: usize, actual: usize },

    #[error("invalid mask for {name:?}: {reason}")]
    InvalidMask { name: String, reason: String },

    #[error("store is not serializable: {0}")]
    NotSerializable(String),
}

const METADATA_KEY: &str = "__metadata__";
const PRUNE_KEY_PREFIX: &str = "prune.";
const RECORD_SEPARATOR: char = ';';

/// Serialize a store to the canonical checkpoint byte layout.
pub fn to_bytes(store: &ParameterStore) -> Result<Vec<u8>, CheckpointError> {
    // One flat namespace: parameters and mask buffers side by side.
    let mut tensors: BTreeMap<&str, &Tensor> = BTreeMap::new();
    for name in store.param_names() {
        tensors.insert(name, store.param(name).unwrap());
    }
    for name in store.buffer_names() {
        if tensors.insert(name, store.buffer(name).unwrap()).is_some() {
            return Err(CheckpointError::NotSerializable(format!(
                "duplicate tensor name {name:?}"
            )));
        }
    }
    if tensors.contains_key(METADATA_KEY) {
        return Err(CheckpointError::NotSerializable(format!(
            "tensor name {METADATA_KEY:?} is reserved"
        )));
    }
    // A plain `X_orig` + `X_mask` pair that is not pruning state would be
    // indistinguishable from one on reload; refuse to write it.
    for name in tensors.keys() {
        if let Some(base) = name.strip_suffix("_orig") {
            if !base.is_empty()
                && tensors.contains_key(format!("{base}_mask").as_str())
                && store.hook(base).is_none()
            {
                return Err(CheckpointError::NotSerializable(format!(
                    "names {base}_orig/{base}_mask collide with the reparametrization convention"
                )));
            }
        }
    }

    let mut metadata = BTreeMap::new();
    metadata.insert("format_version".to_string(), FORMAT_VERSION.to_string());
    for hook in store.hooks() {
        metadata.insert(
            format!("{PRUNE_KEY_PREFIX}{}", hook.tensor_name()),
            hook.record().join(&RECORD_SEPARATOR.to_string()),
        );
    }

    // Header keys are emitted in BTreeMap order, so they are sorted even if
    // some other build of serde_json preserves insertion order.
    let mut header = serde_json::Map::new();
    header.insert(
        METADATA_KEY.to_string(),
        Value::Object(
            metadata
                .into_iter()
                .map(|(k, v)| (k, Value::String(v)))
                .collect(),
        ),
    );
    let mut offset = 0usize;
    let mut payload = Vec::new();
    for (name, tensor) in &tensors {
        let bytes = tensor.to_le_bytes();
        let end = offset + bytes.len();
        let mut entry = serde_json::Map::new();
        entry.insert("data_offsets".to_string(), serde_json::json!([offset, end]));
        entry.insert("dtype".to_string(), Value::String(tensor.dtype().tag().to_string()));
        entry.insert(
            "shape".to_string(),
            Value::Array(tensor.shape().iter().map(|&e| Value::from(e)).collect()),
        );
        header.insert(name.to_string(), Value::Object(entry));
        payload.extend_from_slice(&bytes);
        offset = end;
    }

    let header_bytes = serde_json::to_vec(&Value::Object(header))
        .map_err(|e| CheckpointError::NotSerializable(e.to_string()))?;
    let mut out = Vec::with_capacity(8 + header_bytes.len() + payload.len());
    out.extend_from_slice(&(header_bytes.len() as u64).to_le_bytes());
    out.extend_from_slice(&header_bytes);
    out.extend_from_slice(&payload);
    Ok(out)
}

/// Reconstruct a store from checkpoint bytes, validating the format strictly.
pub fn from_bytes(bytes: &[u8]) -> Result<ParameterStore, CheckpointError> {
    if bytes.len() < 8 {
        return Err(CheckpointError::MalformedHeader("file too small for header length".into()));
    }
    let header_len = u64::from_le_bytes(bytes[..8].try_into().unwrap()) as usize;
    if bytes.len() - 8 < header_len {
        return Err(CheckpointError::MalformedHeader(format!(
            "declared header length {header_len} exceeds file size"
        )));
    }
    let header: Value = serde_json::from_slice(&bytes[8..8 + header_len])
        .map_err(|e| CheckpointError::MalformedHeader(e.to_string()))?;
    let Value::Object(header) = header else {
        return Err(CheckpointError::MalformedHeader("header is not an object".into()));
    };
    let payload = &bytes[8 + header_len..];

    let mut metadata: BTreeMap<String, String> = BTreeMap::new();
    let mut entries: Vec<(String, Vec<usize>, DType, [usize; 2])> = Vec::new();
    for (name, value) in header {
        if name == METADATA_KEY {
            let Value::Object(map) = value else {
                return Err(CheckpointError::MalformedHeader("__metadata__ is not an object".into()));
            };
            for (k, v) in map {
                let Value::String(s) = v else {
                    return Err(CheckpointError::MalformedHeader(format!(
                        "metadata value for {k:?} is not a string"
                    )));
                };
                metadata.insert(k, s);
            }
            continue;
        }
        entries.push(parse_entry(&name, &value)?);
    }
    if let Some(version) = metadata.get("format_version") {
        if version != FORMAT_VERSION {
            return Err(CheckpointError::MalformedHeader(format!(
                "unsupported format_version {version:?}"
            )));
        }
    }

    // Ranges must ascend and exactly tile the payload in sorted-name order.
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    let mut expected_start = 0usize;
    for (name, shape, dtype, [begin, end]) in &entries {
        if *begin != expected_start || end < begin {
            return Err(CheckpointError::InvalidOffsets(format!(
                "tensor {name:?} range [{begin},{end}) does not continue at {expected_start}"
            )));
        }
        let numel: usize = shape.iter().product();
        if end - begin != numel * dtype.size() {
            return Err(CheckpointError::InvalidOffsets(format!(
                "tensor {name:?} range length {} does not match shape {:?} ({} bytes)",
                end - begin,
                shape,
                numel * dtype.size()
            )));
        }
        expected_start = *end;
    }
    if payload.len() < expected_start {
        return Err(CheckpointError::TruncatedPayload {
            expected: expected_start,
            actual: payload.len(),
        });
    }
    if payload.len() > expected_start {
        return Err(CheckpointError::InvalidOffsets(format!(
            "payload has {} trailing bytes beyond the declared ranges",
            payload.len() - expected_start
        )));
    }

    let mut tensors: BTreeMap<String, Tensor> = BTreeMap::new();
    for (name, shape, dtype, [begin, end]) in entries {
        let tensor = Tensor::from_le_bytes(shape, dtype, &payload[begin..end])
            .map_err(|e| CheckpointError::MalformedHeader(e.to_string()))?;
        tensors.insert(name, tensor);
    }

    // Every `X_orig` + `X_mask` pair is pruning state.
    let names: Vec<String> = tensors.keys().cloned().collect();
    let mut pruned: Vec<String> = Vec::new();
    for name in &names {
        if let Some(base) = name.strip_suffix("_orig") {
            if !base.is_empty() && tensors.contains_key(&format!("{base}_mask")) {
                if tensors.contains_key(base) {
                    return Err(CheckpointError::MalformedHeader(format!(
                        "parameter {base:?} conflicts with its reparametrized pair"
                    )));
                }
                pruned.push(base.to_string());
            }
        }
    }
    for key in metadata.keys() {
        if let Some(target) = key.strip_prefix(PRUNE_KEY_PREFIX) {
            if !pruned.iter().any(|p| p == target) {
                return Err(CheckpointError::MalformedHeader(format!(
                    "prune record for unknown parameter {target:?}"
                )));
            }
        }
    }

    let mut store = ParameterStore::new();
    for name in &names {
        let is_pair_member = pruned
            .iter()
            .any(|p| *name == format!("{p}_orig") || *name == format!("{p}_mask"));
        if !is_pair_member {
            store
                .insert_param(name.clone(), tensors[name].clone())
                .map_err(|e| CheckpointError::MalformedHeader(e.to_string()))?;
        }
    }
    for base in &pruned {
        let orig = tensors[&format!("{base}_orig")].clone();
        let mask_tensor = tensors[&format!("{base}_mask")].clone();
        if mask_tensor.shape() != orig.shape() || mask_tensor.dtype() != orig.dtype() {
            return Err(CheckpointError::InvalidMask {
                name: base.clone(),
                reason: "mask shape or dtype does not match the original tensor".into(),
            });
        }
        let mask = Mask::from_tensor(mask_tensor).map_err(|e| match e {
            PruneError::NonBinaryMask { index, value } => CheckpointError::InvalidMask {
                name: base.clone(),
                reason: format!("non-binary value {value} at flat index {index}"),
            },
            other => CheckpointError::MalformedHeader(other.to_string()),
        })?;
        let record = match metadata.get(&format!("{PRUNE_KEY_PREFIX}{base}")) {
            Some(joined) if !joined.is_empty() => {
                joined.split(RECORD_SEPARATOR).map(str::to_string).collect()
            }
            _ => vec!["custom_from_mask".to_string()],
        };
        store.attach_loaded_hook(base, orig, mask, record);
    }
    Ok(store)
}

fn parse_entry(
    name: &str,
    value: &Value,
) -> Result<(String, Vec<usize>, DType, [usize; 2]), CheckpointError> {
    let Value::Object(map) = value else {
        return Err(CheckpointError::MalformedHeader(format!(
            "entry for {name:?} is not an object"
        )));
    };
    for key in map.keys() {
        if !matches!(key.as_str(), "data_offsets" | "dtype" | "shape") {
            return Err(CheckpointError::MalformedHeader(format!(
                "entry for {name:?} has unexpected key {key:?}"
            )));
        }
    }
    let dtype_tag = map
        .get("dtype")
        .and_then(Value::as_str)
        .ok_or_else(|| CheckpointError::MalformedHeader(format!("entry for {name:?} lacks dtype")))?;
    let dtype = DType::from_tag(dtype_tag)
        .ok_or_else(|| CheckpointError::UnknownDtype(dtype_tag.to_string()))?;
    let shape_value = map
        .get("shape")
        .and_then(Value::as_array)
        .ok_or_else(|| CheckpointError::MalformedHeader(format!("entry for {name:?} lacks shape")))?;
    let mut shape = Vec::with_capacity(shape_value.len());
    for v in shape_value {
        let extent = v.as_u64().filter(|&e| e >= 1).ok_or_else(|| {
            CheckpointError::MalformedHeader(format!("entry for {name:?} has invalid shape"))
        })?;
        shape.push(extent as usize);
    }
    if shape.is_empty() {
        return Err(CheckpointError::MalformedHeader(format!(
            "entry for {name:?} has empty shape"
        )));
    }
    let offsets = map
        .get("data_offsets")
        .and_then(Value::as_array)
        .filter(|a| a.len() == 2)
        .ok_or_else(|| {
            CheckpointError::MalformedHeader(format!("entry for {name:?} lacks data_offsets"))
        })?;
    let begin = offsets[0].as_u64().ok_or_else(|| {
        CheckpointError::MalformedHeader(format!("entry for {name:?} has invalid offsets"))
    })? as usize;
    let end = offsets[1].as_u64().ok_or_else(|| {
        CheckpointError::MalformedHeader(format!("entry for {name:?} has invalid offsets"))
    })? as usize;
    if end < begin {
        return Err(CheckpointError::InvalidOffsets(format!(
            "tensor {name:?} has end {end} before begin {begin}"
        )));
    }
    Ok((name.to_string(), shape, dtype, [begin, end]))
}

/// Write a store to a checkpoint file.
pub fn write_checkpoint(store: &ParameterStore, path: impl AsRef<Path>) -> Result<(), CheckpointError> {
    let bytes = to_bytes(store)?;
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Read a checkpoint file back into a store.
pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<ParameterStore, CheckpointError> {
    let bytes = std::fs::read(path)?;
    from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{l1_unstructured, ln_structured, random_unstructured};
    use crate::methods::Amount;
    use crate::tensor::NormOrder;

    fn craft(header: &str, payload: &[u8]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(header.as_bytes());
        out.extend_from_slice(payload);
        out
    }

    fn le32(values: &[f32]) -> Vec<u8> {
        values.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    #[test]
    fn header_layout_is_pinned() {
        let mut s = ParameterStore::new();
        s.insert_param("w", Tensor::from_f32(vec![2], vec![1.0, 2.0]).unwrap()).unwrap();
        let bytes = to_bytes(&s).unwrap();
        let n = u64::from_le_bytes(bytes[..8].try_into().unwrap()) as usize;
        let header = std::str::from_utf8(&bytes[8..8 + n]).unwrap();
        assert_eq!(
            header,
            r#"{"__metadata__":{"format_version":"1"},"w":{"data_offsets":[0,8],"dtype":"F32","shape":[2]}}"#
        );
        assert_eq!(bytes.len() - 8 - n, 8);
        assert_eq!(&bytes[8 + n..], le32(&[1.0, 2.0]).as_slice());
    }

    #[test]
    fn pruned_store_serializes_orig_and_mask() {
        let mut s = ParameterStore::new();
        s.insert_param("w", Tensor::from_f32(vec![4], vec![0.1, 2.0, 3.0, 4.0]).unwrap()).unwrap();
        l1_unstructured(&mut s, "w", Amount::Count(1)).unwrap();
        let bytes = to_bytes(&s).unwrap();
        let n = u64::from_le_bytes(bytes[..8].try_into().unwrap()) as usize;
        let header = std::str::from_utf8(&bytes[8..8 + n]).unwrap();
        assert!(header.contains("\"w_orig\""));
        assert!(header.contains("\"w_mask\""));
        assert!(header.contains("\"prune.w\":\"l1_unstructured(amount=count:1)\""));
        assert!(!header.contains("\"w\":"));
    }

    #[test]
    fn roundtrip_preserves_everything() {
        let mut s = ParameterStore::new();
        s.insert_param("a.weight", Tensor::from_f32(vec![3, 2], vec![1.0, -2.0, 0.5, 4.0, -0.25, 8.0]).unwrap())
            .unwrap();
        s.insert_param("a.bias", Tensor::from_f64(vec![3], vec![0.1, 0.2, 0.3]).unwrap()).unwrap();
        l1_unstructured(&mut s, "a.weight", Amount::Count(2)).unwrap();
        ln_structured(&mut s, "a.weight", Amount::Fraction(0.5), NormOrder::new(2.0).unwrap(), 0)
            .unwrap();

        let bytes = to_bytes(&s).unwrap();
        let loaded = from_bytes(&bytes).unwrap();
        assert!(loaded.is_pruned());
        assert!(loaded.is_parameter_pruned("a.weight"));
        assert_eq!(loaded.effective("a.weight").unwrap(), s.effective("a.weight").unwrap());
        assert_eq!(loaded.param("a.bias"), s.param("a.bias"));
        assert_eq!(
            loaded.hook("a.weight").unwrap().record(),
            s.hook("a.weight").unwrap().record()
        );

        // Canonical form: write -> read -> write is byte-identical.
        assert_eq!(to_bytes(&loaded).unwrap(), bytes);
    }

    #[test]
    fn writing_twice_is_byte_identical() {
        let mut s = ParameterStore::new();
        s.insert_param("w", Tensor::from_f64(vec![5], vec![5.0, 4.0, 3.0, 2.0, 1.0]).unwrap())
            .unwrap();
        random_unstructured(&mut s, "w", Amount::Fraction(0.4), 7).unwrap();
        assert_eq!(to_bytes(&s).unwrap(), to_bytes(&s).unwrap());
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.pkt");
        let mut s = ParameterStore::new();
        s.insert_param("w", Tensor::from_f32(vec![2], vec![1.0, 2.0]).unwrap()).unwrap();
        write_checkpoint(&s, &path).unwrap();
        let loaded = read_checkpoint(&path).unwrap();
        assert_eq!(loaded.param("w"), s.param("w"));
    }

    #[test]
    fn empty_store_roundtrips() {
        let s = ParameterStore::new();
        let bytes = to_bytes(&s).unwrap();
        let loaded = from_bytes(&bytes).unwrap();
        assert!(!loaded.is_pruned());
        assert_eq!(loaded.param_names().count(), 0);
        assert_eq!(to_bytes(&loaded).unwrap(), bytes);
    }

    #[test]
    fn remove_then_save_equals_save_then_remove() {
        let mut s = ParameterStore::new();
        s.insert_param("w", Tensor::from_f64(vec![4], vec![0.4, 0.3, 0.2, 0.1]).unwrap()).unwrap();
        l1_unstructured(&mut s, "w", Amount::Count(2)).unwrap();

        let bytes = to_bytes(&s).unwrap();
        let mut save_then_remove = from_bytes(&bytes).unwrap();
        save_then_remove.remove("w").unwrap();

        s.remove("w").unwrap();
        let remove_then_save = from_bytes(&to_bytes(&s).unwrap()).unwrap();

        assert_eq!(remove_then_save.param("w"), save_then_remove.param("w"));
    }

    #[test]
    fn truncated_file_is_malformed() {
        assert!(matches!(from_bytes(&[1, 2, 3]), Err(CheckpointError::MalformedHeader(_))));
        let mut s = ParameterStore::new();
        s.insert_param("w", Tensor::from_f32(vec![2], vec![1.0, 2.0]).unwrap()).unwrap();
        let bytes = to_bytes(&s).unwrap();
        // Claim a header longer than the file.
        let mut bad = bytes.clone();
        bad[..8].copy_from_slice(&(bytes.len() as u64 * 2).to_le_bytes());
        assert!(matches!(from_bytes(&bad), Err(CheckpointError::MalformedHeader(_))));
    }

    #[test]
    fn bad_json_is_malformed() {
        let bytes = craft("{not json", &[]);
        assert!(matches!(from_bytes(&bytes), Err(CheckpointError::MalformedHeader(_))));
    }

    #[test]
    fn unknown_dtype_is_distinct() {
        let header = r#"{"w":{"data_offsets":[0,8],"dtype":"BF16","shape":[4]}}"#;
        let bytes = craft(header, &[0; 8]);
        assert!(matches!(from_bytes(&bytes), Err(CheckpointError::UnknownDtype(tag)) if tag == "BF16"));
    }

    #[test]
    fn overlapping_ranges_are_rejected() {
        let header = r#"{"a":{"data_offsets":[0,8],"dtype":"F32","shape":[2]},"b":{"data_offsets":[4,12],"dtype":"F32","shape":[2]}}"#;
        let bytes = craft(header, &[0; 12]);
        assert!(matches!(from_bytes(&bytes), Err(CheckpointError::InvalidOffsets(_))));
    }

    #[test]
    fn gap_in_ranges_is_rejected() {
        let header = r#"{"a":{"data_offsets":[0,4],"dtype":"F32","shape":[1]},"b":{"data_offsets":[8,12],"dtype":"F32","shape":[1]}}"#;
        let bytes = craft(header, &[0; 12]);
        assert!(matches!(from_bytes(&bytes), Err(CheckpointError::InvalidOffsets(_))));
    }

    #[test]
    fn range_length_must_match_shape() {
        let header = r#"{"a":{"data_offsets":[0,8],"dtype":"F32","shape":[3]}}"#;
        let bytes = craft(header, &[0; 8]);
        assert!(matches!(from_bytes(&bytes), Err(CheckpointError::InvalidOffsets(_))));
    }

    #[test]
    fn offsets_beyond_payload_are_truncation() {
        let header = r#"{"a":{"data_offsets":[0,8],"dtype":"F32","shape":[2]}}"#;
        let bytes = craft(header, &[0; 4]);
        assert!(matches!(
            from_bytes(&bytes),
            Err(CheckpointError::TruncatedPayload { expected: 8, actual: 4 })
        ));
    }

    #[test]
    fn trailing_payload_is_rejected() {
        let header = r#"{"a":{"data_offsets":[0,4],"dtype":"F32","shape":[1]}}"#;
        let bytes = craft(header, &[0; 6]);
        assert!(matches!(from_bytes(&bytes), Err(CheckpointError::InvalidOffsets(_))));
    }

    #[test]
    fn non_binary_mask_is_rejected_on_load() {
        let header = r#"{"w_mask":{"data_offsets":[0,8],"dtype":"F32","shape":[2]},"w_orig":{"data_offsets":[8,16],"dtype":"F32","shape":[2]}}"#;
        let payload = le32(&[1.0, 0.5, 3.0, 4.0]);
        let bytes = craft(header, &payload);
        assert!(matches!(
            from_bytes(&bytes),
            Err(CheckpointError::InvalidMask { name, .. }) if name == "w"
        ));
    }

    #[test]
    fn mask_shape_mismatch_is_rejected_on_load() {
        let header = r#"{"w_mask":{"data_offsets":[0,4],"dtype":"F32","shape":[1]},"w_orig":{"data_offsets":[4,12],"dtype":"F32","shape":[2]}}"#;
        let payload = le32(&[1.0, 3.0, 4.0]);
        let bytes = craft(header, &payload);
        assert!(matches!(from_bytes(&bytes), Err(CheckpointError::InvalidMask { .. })));
    }

    #[test]
    fn pair_conflicting_with_base_parameter_is_rejected() {
        let header = r#"{"w":{"data_offsets":[0,4],"dtype":"F32","shape":[1]},"w_mask":{"data_offsets":[4,8],"dtype":"F32","shape":[1]},"w_orig":{"data_offsets":[8,12],"dtype":"F32","shape":[1]}}"#;
        let payload = le32(&[1.0, 1.0, 2.0]);
        let bytes = craft(header, &payload);
        assert!(matches!(from_bytes(&bytes), Err(CheckpointError::MalformedHeader(_))));
    }

    #[test]
    fn prune_record_for_unknown_parameter_is_rejected() {
        let header = r#"{"__metadata__":{"format_version":"1","prune.v":"identity"},"w":{"data_offsets":[0,4],"dtype":"F32","shape":[1]}}"#;
        let bytes = craft(header, &le32(&[1.0]));
        assert!(matches!(from_bytes(&bytes), Err(CheckpointError::MalformedHeader(_))));
    }

    #[test]
    fn unsupported_version_is_rejected() {
        let header = r#"{"__metadata__":{"format_version":"2"}}"#;
        let bytes = craft(header, &[]);
        assert!(matches!(from_bytes(&bytes), Err(CheckpointError::MalformedHeader(_))));
    }

    #[test]
    fn spurious_pair_is_not_serializable() {
        let mut s = ParameterStore::new();
        s.insert_param("w_orig", Tensor::from_f32(vec![1], vec![1.0]).unwrap()).unwrap();
        s.insert_param("w_mask", Tensor::from_f32(vec![1], vec![1.0]).unwrap()).unwrap();
        assert!(matches!(to_bytes(&s), Err(CheckpointError::NotSerializable(_))));
    }

    #[test]
    fn reserved_metadata_name_is_not_serializable() {
        let mut s = ParameterStore::new();
        s.insert_param("__metadata__", Tensor::from_f32(vec![1], vec![1.0]).unwrap()).unwrap();
        assert!(matches!(to_bytes(&s), Err(CheckpointError::NotSerializable(_))));
    }

    #[test]
    fn lone_suffixed_names_stay_plain_parameters() {
        let mut s = ParameterStore::new();
        s.insert_param("w_mask", Tensor::from_f32(vec![1], vec![0.5]).unwrap()).unwrap();
        let loaded = from_bytes(&to_bytes(&s).unwrap()).unwrap();
        assert!(!loaded.is_pruned());
        assert_eq!(loaded.param("w_mask"), s.param("w_mask"));
    }
}
