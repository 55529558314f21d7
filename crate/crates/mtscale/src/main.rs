//! `mtscale` — command-line front end for the multi-timescale recurrent
//! network toolkit.
//!
//! Exit codes are a stable contract for CI:
//! * 0 — success
//! * 2 — usage or configuration error
//! * 3 — numeric abort (non-finite loss or gradients)
//! * 4 — gradient-check failure

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mtscale::analysis::PlotKind;
use mtscale::data::{gen_case1, gen_multimodal, load_set, save_set, MultimodalSpec, SequenceSelection};
use mtscale::error::{Error, Result};
use mtscale::experiment::{
    run_analyze, run_compare, run_grad_check, run_train, ExperimentConfig, GRAD_CHECK_TOLERANCE,
    SEED_ENV_VAR,
};
use mtscale::network::CellKind;

/// Like `println!` but ignores broken-pipe errors so `mtscale ... | head`
/// does not panic.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(
    name = "mtscale",
    version,
    about = "Multi-timescale recurrent network toolkit: data generation, training, \
             cell-kind comparison, gradient checking, and analysis export.",
    after_help = "The MTSCALE_SEED environment variable overrides the config seed \
                  for train and compare runs (the override is logged)."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a dataset directory (per-sequence CSVs plus a manifest)
    GenData(GenDataArgs),
    /// Train one cell kind from a JSON config and write run artifacts
    Train(TrainArgs),
    /// Train both cell kinds from the same config and compare them
    Compare(CompareArgs),
    /// Verify analytic gradients against central finite differences
    GradCheck(GradCheckArgs),
    /// Export plot CSVs from a saved checkpoint
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("which").required(true).args(["case1", "multimodal"]))]
struct GenDataArgs {
    /// The two-pattern analytic set (100 steps, 2 dims)
    #[arg(long)]
    case1: bool,
    /// The synthetic 43-dim command + perception set
    #[arg(long)]
    multimodal: bool,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Number of sequences to sample (multimodal)
    #[arg(long, conflicts_with_all = ["case1", "sweep"])]
    seqs: Option<usize>,
    /// Generator seed (multimodal)
    #[arg(long, conflicts_with = "case1")]
    seed: Option<u64>,
    /// Steps per sequence (multimodal)
    #[arg(long, conflicts_with = "case1")]
    seq_len: Option<usize>,
    /// Observation noise standard deviation (multimodal)
    #[arg(long, conflicts_with = "case1")]
    noise_std: Option<f64>,
    /// Enumerate one sequence per (action, object) pair instead of sampling
    #[arg(long, conflicts_with = "case1")]
    sweep: bool,
}

#[derive(Args)]
struct TrainArgs {
    /// Experiment config JSON (see presets/)
    #[arg(long)]
    config: PathBuf,
    /// Cell kind; overrides the config's cell_kind
    #[arg(long, value_enum)]
    cell: Option<CellArg>,
    /// Dataset directory; overrides the config's data field
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output directory; overrides the config's out field
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's epoch count
    #[arg(long)]
    epochs: Option<usize>,
    /// Override the config's per-sequence iteration cap
    #[arg(long)]
    max_iteration: Option<u64>,
    /// Override the config's seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CompareArgs {
    /// Experiment config JSON (see presets/)
    #[arg(long)]
    config: PathBuf,
    /// Dataset directory; overrides the config's data field
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output directory; overrides the config's out field
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run the arms sequentially for clean per-step timing
    #[arg(long)]
    serial: bool,
    /// Override the config's epoch count
    #[arg(long)]
    epochs: Option<usize>,
    /// Override the config's per-sequence iteration cap
    #[arg(long)]
    max_iteration: Option<u64>,
    /// Override the config's seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct GradCheckArgs {
    /// Which cell kind to check
    #[arg(long, value_enum, default_value_t = CheckCellArg::Both)]
    cell: CheckCellArg,
    /// Central-difference step size
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
    /// Sampled coordinates per weight block
    #[arg(long, default_value_t = 100)]
    coords: usize,
    /// Negative control: corrupt the analytic gradients so the check must fail
    #[arg(long, hide = true)]
    self_test_corrupt: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Checkpoint written by a train or compare run
    #[arg(long)]
    checkpoint: PathBuf,
    /// Dataset directory (the first sequence is rolled out)
    #[arg(long)]
    data: PathBuf,
    /// Export kind: prediction_overlay, context_activity, or context_pca
    #[arg(long)]
    kind: String,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum CellArg {
    Mtrnn,
    Mtgru,
}

impl From<CellArg> for CellKind {
    fn from(a: CellArg) -> CellKind {
        match a {
            CellArg::Mtrnn => CellKind::Mtrnn,
            CellArg::Mtgru => CellKind::Mtgru,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckCellArg {
    Mtrnn,
    Mtgru,
    Both,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::GenData(a) => gen_data(a),
        Cmd::Train(a) => train_cmd(a),
        Cmd::Compare(a) => compare_cmd(a),
        Cmd::GradCheck(a) => grad_check_cmd(a),
        Cmd::Analyze(a) => analyze_cmd(a),
    }
}

fn gen_data(a: GenDataArgs) -> Result<i32> {
    let set = if a.case1 {
        gen_case1()
    } else {
        let mut spec = MultimodalSpec::default();
        if a.sweep {
            spec.selection = SequenceSelection::Sweep;
        } else if let Some(n) = a.seqs {
            spec.selection = SequenceSelection::Sample(n);
        }
        if let Some(s) = a.seed {
            spec.seed = s;
        }
        if let Some(t) = a.seq_len {
            spec.seq_len = t;
        }
        if let Some(n) = a.noise_std {
            spec.noise_std = n;
        }
        gen_multimodal(&spec)?
    };
    save_set(&set, &a.out)?;
    let t = set.sequences[0].data.rows();
    say!(
        "wrote {} sequences (T={}, D={}) from generator {:?} to {}",
        set.sequences.len(),
        t,
        set.dims(),
        set.generator,
        a.out.display()
    );
    Ok(0)
}

/// Resolve a path from a flag, falling back to a config field.
fn resolve_path(flag: Option<PathBuf>, field: &Option<String>, what: &str) -> Result<PathBuf> {
    flag.or_else(|| field.as_ref().map(PathBuf::from)).ok_or_else(|| {
        Error::Config(format!(
            "no {what} directory: pass --{what} or set \"{what}\" in the config"
        ))
    })
}

fn load_effective_config(
    path: &PathBuf,
    epochs: Option<usize>,
    max_iteration: Option<u64>,
    seed: Option<u64>,
) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_json_file(path)?;
    if let Some(e) = epochs {
        cfg.epochs = e;
    }
    if let Some(m) = max_iteration {
        cfg.max_iteration = m;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(s) = cfg.apply_env_seed_override()? {
        say!("seed overridden via {SEED_ENV_VAR}: {s}");
    }
    cfg.validate()?;
    Ok(cfg)
}

fn train_cmd(a: TrainArgs) -> Result<i32> {
    let cfg = load_effective_config(&a.config, a.epochs, a.max_iteration, a.seed)?;
    let kind: CellKind = match a.cell {
        Some(c) => c.into(),
        None => cfg.cell_kind.ok_or_else(|| {
            Error::Config("no cell kind: pass --cell or set \"cell_kind\" in the config".into())
        })?,
    };
    let data_dir = resolve_path(a.data, &cfg.data, "data")?;
    let out_dir = resolve_path(a.out, &cfg.out, "out")?;
    let set = load_set(&data_dir)?;
    say!(
        "training {kind} on {} sequences (D={}) for {} epochs",
        set.sequences.len(),
        set.dims(),
        cfg.epochs
    );
    let outcome = run_train(&cfg, kind, &set, &out_dir)?;
    say!(
        "done: mean epoch error {:.6e} -> {:.6e}, {} gradient steps, {:.3} ms/step, rms {:.6e}",
        outcome.log.epoch_mean_error.first().copied().unwrap_or(f64::NAN),
        outcome.log.final_mean_error(),
        outcome.report.gradient_steps,
        outcome.report.mean_ms_per_step,
        outcome.report.final_rms
    );
    say!("artifacts in {}", outcome.out_dir.display());
    Ok(0)
}

fn compare_cmd(a: CompareArgs) -> Result<i32> {
    let cfg = load_effective_config(&a.config, a.epochs, a.max_iteration, a.seed)?;
    let data_dir = resolve_path(a.data, &cfg.data, "data")?;
    let out_dir = resolve_path(a.out, &cfg.out, "out")?;
    let set = load_set(&data_dir)?;
    say!(
        "comparing cell kinds on {} sequences (D={}) for {} epochs ({})",
        set.sequences.len(),
        set.dims(),
        cfg.epochs,
        if a.serial { "serial" } else { "two threads" }
    );
    let report = run_compare(&cfg, &set, &out_dir, a.serial)?;
    for arm in [&report.mtrnn, &report.mtgru] {
        say!(
            "{}: final rms {:.6e}, {:.3} ms/step over {} steps",
            arm.cell_kind, arm.final_rms, arm.mean_ms_per_step, arm.gradient_steps
        );
    }
    say!("time ratio (mtgru/mtrnn): {:.3}", report.time_ratio);
    say!("error ratio (mtgru/mtrnn): {:.3}", report.error_ratio);
    say!("artifacts in {}", out_dir.display());
    Ok(0)
}

fn grad_check_cmd(a: GradCheckArgs) -> Result<i32> {
    if !(a.eps > 0.0 && a.eps.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "--eps must be a positive finite number, got {}",
            a.eps
        )));
    }
    if a.coords == 0 {
        return Err(Error::InvalidArgument("--coords must be at least 1".into()));
    }
    let kinds: Vec<CellKind> = match a.cell {
        CheckCellArg::Mtrnn => vec![CellKind::Mtrnn],
        CheckCellArg::Mtgru => vec![CellKind::Mtgru],
        CheckCellArg::Both => vec![CellKind::Mtrnn, CellKind::Mtgru],
    };
    let runs = run_grad_check(&kinds, a.eps, a.coords, a.self_test_corrupt)?;
    let mut worst: Option<(CellKind, &str, usize, f64, f64, f64)> = None;
    for run in &runs {
        for block in &run.report.blocks {
            say!(
                "{:<6} {:<8} coords={:<4} max_rel={:<12.4e} mean_rel={:.4e}",
                run.kind.to_string(),
                block.name,
                block.coords_checked,
                block.max_rel_error,
                block.mean_rel_error
            );
            let is_worse = worst.map_or(true, |w| block.max_rel_error > w.5);
            if is_worse {
                worst = Some((
                    run.kind,
                    &block.name,
                    block.worst_index,
                    block.worst_analytic,
                    block.worst_fd,
                    block.max_rel_error,
                ));
            }
        }
    }
    let all_pass = runs.iter().all(|r| r.report.passes(GRAD_CHECK_TOLERANCE));
    if all_pass {
        say!("grad-check PASS: all blocks below {GRAD_CHECK_TOLERANCE:.0e}");
        Ok(0)
    } else {
        let (kind, name, idx, analytic, fd, rel) = worst.expect("at least one block was checked");
        say!(
            "grad-check FAIL: worst coordinate {kind} {name}[{idx}]: \
             analytic={analytic:.9e} fd={fd:.9e} rel={rel:.4e} (tolerance {GRAD_CHECK_TOLERANCE:.0e})"
        );
        Ok(4)
    }
}

fn analyze_cmd(a: AnalyzeArgs) -> Result<i32> {
    let kind: PlotKind = a.kind.parse()?;
    let set = load_set(&a.data)?;
    let files = run_analyze(&a.checkpoint, &set, kind, &a.out)?;
    for f in &files {
        say!("wrote {}", f.display());
    }
    Ok(0)
}
