//! Command-line front end for inspecting, pruning, globally pruning, and
//! baking weight checkpoints.
//!
//! Exit codes: 0 success, 1 usage error, 2 plan/step failure, 3 I/O or
//! format error, 4 nothing to do (`bake` on a checkpoint with no pruned
//! parameters).

mod glob;
mod plan;

use clap::{Parser, Subcommand};
use plan::{execute_plan, load_plan, run_param_step, select_union, MethodSpec};
use prunekit::checkpoint::to_bytes;
use prunekit::{
    global_unstructured, read_checkpoint, sparsity_report, CheckpointError, ParameterStore,
    PruneTarget, SparsityReport,
};
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or flag values (exit 1).
    Usage(String),
    /// A pruning step or plan could not be applied (exit 2).
    Step(String),
    /// I/O failures and checkpoint format errors (exit 3).
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Step(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Step(m) | CliError::Io(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(name = "prunekit", version, about = "Inspect and prune serialized network weights")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List tensors, shapes, and pruned status.
    Inspect {
        /// Input checkpoint (.pkt).
        input: PathBuf,
    },
    /// Apply one pruning method to the parameters matching a selector.
    Prune {
        input: PathBuf,
        /// Output checkpoint.
        #[arg(short = 'o', long)]
        output: PathBuf,
        /// Parameter name or glob pattern (`*` wildcard).
        #[arg(long)]
        param: String,
        /// identity | random_unstructured | l1_unstructured |
        /// random_structured | ln_structured | custom_from_mask
        #[arg(long)]
        method: String,
        /// Integer count or fraction in [0, 1].
        #[arg(long)]
        amount: Option<String>,
        /// Channel dimension for structured methods (negative counts from
        /// the back).
        #[arg(long)]
        dim: Option<i64>,
        /// Norm order for ln_structured: a positive number or "inf".
        #[arg(long)]
        n: Option<String>,
        /// RNG seed for the random methods (default 0).
        #[arg(long)]
        seed: Option<u64>,
        /// Checkpoint holding the mask for custom_from_mask, looked up by
        /// the target parameter's name.
        #[arg(long)]
        mask_file: Option<PathBuf>,
    },
    /// Prune the globally smallest-magnitude entries across all parameters
    /// matching the include patterns.
    Global {
        input: PathBuf,
        #[arg(short = 'o', long)]
        output: PathBuf,
        /// Glob pattern; repeat the flag to pool several patterns.
        #[arg(long, required = true)]
        include: Vec<String>,
        #[arg(long)]
        amount: String,
        /// Accepted for interface parity; magnitude pooling is
        /// deterministic and ignores it.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Execute a JSON plan file: steps run strictly in order, and the
    /// output is written only if every step succeeds.
    Plan {
        input: PathBuf,
        #[arg(short = 'o', long)]
        output: PathBuf,
        #[arg(long)]
        plan: PathBuf,
    },
    /// Make pruning permanent: collapse orig ⊙ mask into plain parameters.
    Bake {
        input: PathBuf,
        #[arg(short = 'o', long)]
        output: PathBuf,
        /// Parameters to bake (default: every pruned parameter).
        #[arg(long = "param")]
        params: Vec<String>,
    },
    /// Print per-parameter and global sparsity.
    Report {
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn load(path: &Path) -> Result<ParameterStore, CliError> {
    read_checkpoint(path).map_err(|e| match e {
        CheckpointError::Io(io) => CliError::Io(format!("{}: {io}", path.display())),
        other => CliError::Io(format!("{}: {other}", path.display())),
    })
}

/// Write via a temporary sibling file and rename, so a failure never leaves
/// a half-written checkpoint at the destination.
fn write_atomic(store: &ParameterStore, path: &Path) -> Result<(), CliError> {
    let bytes =
        to_bytes(store).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, &bytes).map_err(|e| CliError::Io(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        CliError::Io(format!("{}: {e}", path.display()))
    })
}

fn shape_string(shape: &[usize]) -> String {
    shape.iter().map(usize::to_string).collect::<Vec<_>>().join("x")
}

fn print_inspect(store: &ParameterStore) {
    for name in store.logical_param_names() {
        let (tensor, status) = if store.is_parameter_pruned(&name) {
            let records = store.hook(&name).map(|h| h.record().join("; ")).unwrap_or_default();
            (store.effective(&name).expect("pruned name resolves"), format!("pruned: {records}"))
        } else {
            (store.param(&name).expect("logical name resolves").clone(), "dense".to_string())
        };
        println!(
            "{:<28} {:>4} {:<14} {}",
            name,
            tensor.dtype().tag(),
            shape_string(tensor.shape()),
            status
        );
    }
    println!("store pruned: {}", if store.is_pruned() { "yes" } else { "no" });
}

fn print_report(report: &SparsityReport) {
    println!(
        "{:<28} {:<14} {:>10} {:>10} {:>9}  status",
        "tensor", "shape", "elements", "zeros", "sparsity"
    );
    for t in &report.tensors {
        println!(
            "{:<28} {:<14} {:>10} {:>10} {:>8.2}%  {}",
            t.name,
            shape_string(&t.shape),
            t.elements,
            t.zeros,
            t.sparsity * 100.0,
            if t.pruned { "pruned" } else { "dense" }
        );
    }
    println!(
        "total: {} of {} entries zero, global sparsity {:.2}%",
        report.total_zeros,
        report.total_elements,
        report.global_sparsity * 100.0
    );
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Inspect { input } => {
            let store = load(&input)?;
            print_inspect(&store);
            Ok(0)
        }
        Command::Report { input, json } => {
            let store = load(&input)?;
            let report = sparsity_report(&store);
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report)
                        .expect("report serialization is infallible")
                );
            } else {
                print_report(&report);
            }
            Ok(0)
        }
        Command::Prune { input, output, param, method, amount, dim, n, seed, mask_file } => {
            let mut store = load(&input)?;
            let spec = MethodSpec {
                method,
                amount: amount
                    .as_deref()
                    .map(plan::parse_amount)
                    .transpose()
                    .map_err(CliError::Usage)?,
                dim: dim.map(|d| d as isize),
                n: n.as_deref().map(plan::parse_norm_order).transpose().map_err(CliError::Usage)?,
                seed,
                mask_file,
            };
            run_param_step(&mut store, &spec, &param).map_err(CliError::Step)?;
            write_atomic(&store, &output)?;
            print_report(&sparsity_report(&store));
            Ok(0)
        }
        Command::Global { input, output, include, amount, seed: _ } => {
            let mut store = load(&input)?;
            let amount = plan::parse_amount(&amount).map_err(CliError::Usage)?;
            let names = select_union(&store, &include).map_err(CliError::Step)?;
            global_unstructured(&mut [PruneTarget::new(&mut store, names)], amount)
                .map_err(|e| CliError::Step(e.to_string()))?;
            write_atomic(&store, &output)?;
            print_report(&sparsity_report(&store));
            Ok(0)
        }
        Command::Plan { input, output, plan } => {
            let mut store = load(&input)?;
            let steps = load_plan(&plan)?;
            execute_plan(&mut store, &steps)?;
            write_atomic(&store, &output)?;
            print_report(&sparsity_report(&store));
            Ok(0)
        }
        Command::Bake { input, output, params } => {
            let mut store = load(&input)?;
            let names: Vec<String> = if params.is_empty() {
                store.hooks().iter().map(|h| h.tensor_name().to_string()).collect()
            } else {
                params
            };
            if names.is_empty() {
                println!("nothing to bake: no pruned parameters");
                write_atomic(&store, &output)?;
                return Ok(4);
            }
            for name in &names {
                store.remove(name).map_err(|e| CliError::Step(e.to_string()))?;
            }
            write_atomic(&store, &output)?;
            println!("baked {} parameter(s): {}", names.len(), names.join(", "));
            Ok(0)
        }
    }
}
