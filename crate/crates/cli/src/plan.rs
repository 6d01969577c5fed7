//! Pruning plans: an ordered list of steps read from a JSON plan file (the
//! same structured-text syntax as the checkpoint header) and executed
//! strictly in order against one store.
//!
//! ```json
//! {
//!   "steps": [
//!     {"param": "features.0.weight", "method": "l1_unstructured", "amount": 3},
//!     {"param": "features.0.weight", "method": "ln_structured",
//!      "amount": 0.5, "n": 2, "dim": 0},
//!     {"global": ["*.weight"], "amount": 0.2}
//!   ]
//! }
//! ```
//!
//! Amounts are integers (absolute counts) or floats in `[0, 1]` (fractions
//! of the currently unpruned candidates); `"n"` is a positive number or
//! `"inf"`; seeds default to 0 when omitted. `custom_from_mask` steps name a
//! `mask_file` checkpoint whose tensor with the target parameter's name is
//! used as the mask.

use crate::glob::glob_match;
use crate::CliError;
use prunekit::{
    global_unstructured, read_checkpoint, Amount, CustomFromMask, Identity, L1Unstructured,
    LnStructured, Mask, NormOrder, ParameterStore, PruneTarget, PruningMethod, RandomStructured,
    RandomUnstructured,
};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const METHOD_NAMES: [&str; 6] = [
    "identity",
    "random_unstructured",
    "l1_unstructured",
    "random_structured",
    "ln_structured",
    "custom_from_mask",
];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    steps: Vec<serde_json::Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalStep {
    pub global: Vec<String>,
    pub amount: serde_json::Value,
    /// Accepted for interface parity; magnitude pooling ignores it.
    #[serde(default)]
    #[allow(dead_code)]
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamStep {
    pub param: String,
    pub method: String,
    #[serde(default)]
    pub amount: Option<serde_json::Value>,
    #[serde(default)]
    pub dim: Option<i64>,
    #[serde(default)]
    pub n: Option<serde_json::Value>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub mask_file: Option<PathBuf>,
}

#[derive(Debug)]
pub enum PlanStep {
    Param(ParamStep),
    Global(GlobalStep),
}

/// Parse a plan document; step indices in errors are 1-based.
pub fn parse_plan(text: &str) -> Result<Vec<PlanStep>, String> {
    let file: PlanFile = serde_json::from_str(text).map_err(|e| format!("plan file: {e}"))?;
    let mut steps = Vec::with_capacity(file.steps.len());
    for (idx, value) in file.steps.into_iter().enumerate() {
        let step_no = idx + 1;
        let is_global = value.as_object().is_some_and(|o| o.contains_key("global"));
        let step = if is_global {
            PlanStep::Global(
                GlobalStep::deserialize(value).map_err(|e| format!("step {step_no}: {e}"))?,
            )
        } else {
            PlanStep::Param(
                ParamStep::deserialize(value).map_err(|e| format!("step {step_no}: {e}"))?,
            )
        };
        steps.push(step);
    }
    Ok(steps)
}

/// `"3"` is a count, `"0.5"` is a fraction in `[0, 1]`.
pub fn parse_amount(text: &str) -> Result<Amount, String> {
    let text = text.trim();
    let looks_integral = !text.contains(['.', 'e', 'E']);
    if looks_integral {
        if let Ok(count) = text.parse::<u64>() {
            return Ok(Amount::Count(count as usize));
        }
    }
    match text.parse::<f64>() {
        Ok(fraction) if (0.0..=1.0).contains(&fraction) => Ok(Amount::Fraction(fraction)),
        Ok(fraction) => Err(format!("fraction {fraction} outside [0, 1]")),
        Err(_) => Err(format!("amount {text:?} is neither a count nor a fraction")),
    }
}

fn amount_from_json(value: &serde_json::Value) -> Result<Amount, String> {
    match value {
        serde_json::Value::Number(n) => {
            if let Some(count) = n.as_u64() {
                Ok(Amount::Count(count as usize))
            } else if let Some(fraction) = n.as_f64() {
                Ok(Amount::Fraction(fraction))
            } else {
                Err(format!("amount {n} is out of range"))
            }
        }
        serde_json::Value::String(s) => parse_amount(s),
        other => Err(format!("amount must be a number, got {other}")),
    }
}

/// `"inf"` (any case) or a positive number.
pub fn parse_norm_order(text: &str) -> Result<NormOrder, String> {
    if text.trim().eq_ignore_ascii_case("inf") {
        return Ok(NormOrder::INF);
    }
    let value: f64 =
        text.trim().parse().map_err(|_| format!("norm order {text:?} is not a number"))?;
    NormOrder::new(value).map_err(|e| e.to_string())
}

fn norm_from_json(value: &serde_json::Value) -> Result<NormOrder, String> {
    match value {
        serde_json::Value::Number(n) => {
            let v = n.as_f64().ok_or_else(|| format!("norm order {n} is out of range"))?;
            NormOrder::new(v).map_err(|e| e.to_string())
        }
        serde_json::Value::String(s) => parse_norm_order(s),
        other => Err(format!("norm order must be a number or \"inf\", got {other}")),
    }
}

/// Logical parameter names matching a pattern, sorted.
pub fn select_params(store: &ParameterStore, pattern: &str) -> Result<Vec<String>, String> {
    let names = store.logical_param_names();
    let matched: Vec<String> =
        names.iter().filter(|n| glob_match(pattern, n)).cloned().collect();
    if matched.is_empty() {
        return Err(format!(
            "selector {pattern:?} matched no parameters; available: {}",
            if names.is_empty() { "(none)".to_string() } else { names.join(", ") }
        ));
    }
    Ok(matched)
}

/// Fully-resolved configuration of one per-parameter step.
pub struct MethodSpec {
    pub method: String,
    pub amount: Option<Amount>,
    pub dim: Option<isize>,
    pub n: Option<NormOrder>,
    pub seed: Option<u64>,
    pub mask_file: Option<PathBuf>,
}

impl MethodSpec {
    pub fn from_step(step: &ParamStep) -> Result<Self, String> {
        Ok(Self {
            method: step.method.clone(),
            amount: step.amount.as_ref().map(amount_from_json).transpose()?,
            dim: step.dim.map(|d| d as isize),
            n: step.n.as_ref().map(norm_from_json).transpose()?,
            seed: step.seed,
            mask_file: step.mask_file.clone(),
        })
    }

    fn require_amount(&self) -> Result<Amount, String> {
        self.amount.ok_or_else(|| format!("{} requires an amount", self.method))
    }

    fn require_dim(&self) -> Result<isize, String> {
        self.dim.ok_or_else(|| format!("{} requires a dim", self.method))
    }

    fn forbid(&self, what: &str, present: bool) -> Result<(), String> {
        if present {
            Err(format!("{} takes no {what}", self.method))
        } else {
            Ok(())
        }
    }

    /// Build the concrete method for one target parameter. `custom_from_mask`
    /// looks the mask up by the parameter's name in the `mask_file`
    /// checkpoint.
    pub fn build(&self, param: &str) -> Result<Arc<dyn PruningMethod>, String> {
        match self.method.as_str() {
            "identity" => {
                self.forbid("amount", self.amount.is_some())?;
                self.forbid("dim", self.dim.is_some())?;
                self.forbid("n", self.n.is_some())?;
                self.forbid("seed", self.seed.is_some())?;
                self.forbid("mask_file", self.mask_file.is_some())?;
                Ok(Arc::new(Identity))
            }
            "random_unstructured" => {
                self.forbid("dim", self.dim.is_some())?;
                self.forbid("n", self.n.is_some())?;
                self.forbid("mask_file", self.mask_file.is_some())?;
                Ok(Arc::new(RandomUnstructured::new(self.require_amount()?, self.seed.unwrap_or(0))))
            }
            "l1_unstructured" => {
                self.forbid("dim", self.dim.is_some())?;
                self.forbid("n", self.n.is_some())?;
                self.forbid("seed", self.seed.is_some())?;
                self.forbid("mask_file", self.mask_file.is_some())?;
                Ok(Arc::new(L1Unstructured::new(self.require_amount()?)))
            }
            "random_structured" => {
                self.forbid("n", self.n.is_some())?;
                self.forbid("mask_file", self.mask_file.is_some())?;
                Ok(Arc::new(RandomStructured::new(
                    self.require_amount()?,
                    self.require_dim()?,
                    self.seed.unwrap_or(0),
                )))
            }
            "ln_structured" => {
                self.forbid("seed", self.seed.is_some())?;
                self.forbid("mask_file", self.mask_file.is_some())?;
                let n = self.n.ok_or_else(|| "ln_structured requires n".to_string())?;
                Ok(Arc::new(LnStructured::new(self.require_amount()?, n, self.require_dim()?)))
            }
            "custom_from_mask" => {
                self.forbid("amount", self.amount.is_some())?;
                self.forbid("dim", self.dim.is_some())?;
                self.forbid("n", self.n.is_some())?;
                self.forbid("seed", self.seed.is_some())?;
                let path = self
                    .mask_file
                    .as_ref()
                    .ok_or_else(|| "custom_from_mask requires a mask_file".to_string())?;
                let mask_store = read_checkpoint(path)
                    .map_err(|e| format!("mask file {}: {e}", path.display()))?;
                let tensor = mask_store.param(param).ok_or_else(|| {
                    format!("mask file {} has no tensor named {param:?}", path.display())
                })?;
                let mask = Mask::from_tensor(tensor.clone()).map_err(|e| e.to_string())?;
                Ok(Arc::new(CustomFromMask::new(mask)))
            }
            other => Err(format!(
                "unknown method {other:?}; expected one of {}",
                METHOD_NAMES.join(" | ")
            )),
        }
    }
}

/// Apply one per-parameter step to every selected parameter, in name order.
pub fn run_param_step(
    store: &mut ParameterStore,
    spec: &MethodSpec,
    selector: &str,
) -> Result<(), String> {
    let matched = select_params(store, selector)?;
    for name in matched {
        let method = spec.build(&name)?;
        store.apply_dyn(&name, method).map_err(|e| format!("parameter {name:?}: {e}"))?;
    }
    Ok(())
}

/// Union of matches over several patterns, sorted and deduplicated. Every
/// pattern must match something.
pub fn select_union(store: &ParameterStore, patterns: &[String]) -> Result<Vec<String>, String> {
    let mut names = Vec::new();
    for pattern in patterns {
        names.extend(select_params(store, pattern)?);
    }
    names.sort();
    names.dedup();
    Ok(names)
}

/// Execute a whole plan in order. The caller is responsible for writing the
/// store out only on success.
pub fn execute_plan(store: &mut ParameterStore, steps: &[PlanStep]) -> Result<(), CliError> {
    for (idx, step) in steps.iter().enumerate() {
        let step_no = idx + 1;
        let step_err = |e: String| CliError::Step(format!("step {step_no}: {e}"));
        match step {
            PlanStep::Param(param_step) => {
                let spec = MethodSpec::from_step(param_step).map_err(step_err)?;
                run_param_step(store, &spec, &param_step.param).map_err(step_err)?;
            }
            PlanStep::Global(global_step) => {
                // Deterministic magnitude pooling; the seed field is accepted
                // for interface parity but has no effect.
                let amount = amount_from_json(&global_step.amount).map_err(step_err)?;
                let names = select_union(store, &global_step.global).map_err(step_err)?;
                global_unstructured(&mut [PruneTarget::new(store, names)], amount)
                    .map_err(|e| step_err(e.to_string()))?;
            }
        }
    }
    Ok(())
}

pub fn load_plan(path: &Path) -> Result<Vec<PlanStep>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("plan file {}: {e}", path.display())))?;
    parse_plan(&text).map_err(CliError::Step)
}
