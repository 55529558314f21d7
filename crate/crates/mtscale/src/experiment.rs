//! Experiment configuration files and run orchestration.
//!
//! An experiment is described by a single flat JSON config (see
//! [`ExperimentConfig`]); unknown keys are rejected so typos fail loudly.
//! Every run writes its artifacts into one directory with a fixed layout:
//!
//! ```text
//! out/
//!   config.json      effective merged config (flags + env applied)
//!   log.csv          per-sequence training log
//!   curve.csv        mean error per epoch
//!   checkpoint.bin   final weights
//!   report.json      evaluation + timing summary
//!   plots/           CSV exports (comparison runs)
//! ```
//!
//! Comparison runs train both cell kinds from the same config and data and
//! write each arm into a `mtrnn/` / `mtgru/` subdirectory plus a combined
//! `report.json` with the time and error ratios. The environment variable
//! `MTSCALE_SEED` overrides the config seed (logged and recorded in the
//! written config).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{
    arm_report, export_plot_data, ArmReport, ComparisonReport, PlotKind, PlotSource,
};
use crate::data::SequenceSet;
use crate::error::{Error, Result};
use crate::network::{
    build_network, load_checkpoint, run_sequence, save_checkpoint, AlphaDirection, CellKind,
    Network, NetworkConfig,
};
use crate::numerics::Matrix;
use crate::training::{
    grad_check, grad_check_sabotaged, train, write_text, GradCheckReport, TrainConfig, TrainingLog,
};

/// Environment variable that overrides the config seed.
pub const SEED_ENV_VAR: &str = "MTSCALE_SEED";

/// Gate for the gradient-check command: it succeeds only when every block's
/// maximum relative error is below this.
pub const GRAD_CHECK_TOLERANCE: f64 = 1e-5;

/// Flat experiment description, stored as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_io: usize,
    pub n_cf: usize,
    pub n_cs: usize,
    pub tau_f: f64,
    pub tau_s: f64,
    pub eta: f64,
    pub threshold: f64,
    pub max_iteration: u64,
    pub epochs: usize,
    pub alpha: f64,
    #[serde(default)]
    pub alpha_direction: AlphaDirection,
    pub seed: u64,
    /// Cell kind for single-arm training; comparison runs train both.
    #[serde(default)]
    pub cell_kind: Option<CellKind>,
    #[serde(default)]
    pub linear_readout: bool,
    #[serde(default)]
    pub clip_gradients: bool,
    /// Default dataset directory (the `--data` flag overrides it).
    #[serde(default)]
    pub data: Option<String>,
    /// Default output directory (the `--out` flag overrides it).
    #[serde(default)]
    pub out: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{} does not parse: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn write_json_file(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("config serialization failed: {e}")))?;
        write_text(path, &json)
    }

    pub fn network_config(&self, kind: CellKind) -> NetworkConfig {
        NetworkConfig {
            n_io: self.n_io,
            n_cf: self.n_cf,
            n_cs: self.n_cs,
            tau_f: self.tau_f,
            tau_s: self.tau_s,
            cell_kind: kind,
            alpha: self.alpha,
            alpha_direction: self.alpha_direction,
            linear_readout: self.linear_readout,
            seed: self.seed,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            eta: self.eta,
            threshold: self.threshold,
            max_iteration: self.max_iteration,
            epochs: self.epochs,
            alpha: self.alpha,
            clip_gradients: self.clip_gradients,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.network_config(self.cell_kind.unwrap_or(CellKind::Mtrnn))
            .validate()?;
        self.train_config().validate()
    }

    /// Apply the `MTSCALE_SEED` override if present. Returns the override
    /// for logging; a malformed value is a config error.
    pub fn apply_env_seed_override(&mut self) -> Result<Option<u64>> {
        match std::env::var(SEED_ENV_VAR) {
            Err(_) => Ok(None),
            Ok(raw) => {
                let seed: u64 = raw.parse().map_err(|_| {
                    Error::Config(format!(
                        "{SEED_ENV_VAR} must be an unsigned integer, got {raw:?}"
                    ))
                })?;
                self.seed = seed;
                Ok(Some(seed))
            }
        }
    }
}

/// The small-pattern preset: 2-dim sequences, 100 fast / 5 slow units,
/// time constants 1 and 20, learning rate 1e-4, threshold 1e-3, 2000
/// iteration cap, 30 epochs, blend 0.9.
pub fn case1_preset() -> ExperimentConfig {
    ExperimentConfig {
        n_io: 2,
        n_cf: 100,
        n_cs: 5,
        tau_f: 1.0,
        tau_s: 20.0,
        eta: 1e-4,
        threshold: 1e-3,
        max_iteration: 2000,
        epochs: 30,
        alpha: 0.9,
        alpha_direction: AlphaDirection::Prediction,
        seed: 2,
        cell_kind: None,
        linear_readout: false,
        clip_gradients: false,
        data: None,
        out: None,
    }
}

/// The multimodal-scale preset: 43-dim sequences, 450 fast / 8 slow units,
/// 5000 iteration cap; other hyperparameters as in the small preset.
pub fn case2_preset() -> ExperimentConfig {
    ExperimentConfig {
        n_io: 43,
        n_cf: 450,
        n_cs: 8,
        max_iteration: 5000,
        ..case1_preset()
    }
}

/// Everything a finished single-arm run produced.
pub struct TrainOutcome {
    pub net: Network,
    pub log: TrainingLog,
    pub report: ArmReport,
    pub out_dir: PathBuf,
}

fn check_set_dims(cfg: &ExperimentConfig, set: &SequenceSet) -> Result<()> {
    set.validate()?;
    if set.dims() != cfg.n_io {
        return Err(Error::ShapeMismatch {
            op: "run",
            left: format!("config with n_io={}", cfg.n_io),
            right: format!("dataset with {} dims", set.dims()),
        });
    }
    Ok(())
}

/// Train one arm and write the full artifact layout into `out_dir`.
pub fn run_train(
    cfg: &ExperimentConfig,
    kind: CellKind,
    set: &SequenceSet,
    out_dir: &Path,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    check_set_dims(cfg, set)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let mut effective = cfg.clone();
    effective.cell_kind = Some(kind);
    effective.write_json_file(&out_dir.join("config.json"))?;

    let mut net = build_network(&cfg.network_config(kind))?;
    let sequences = set.matrices();
    let log = train(&mut net, &sequences, &cfg.train_config())?;
    log.write_log_csv(&out_dir.join("log.csv"))?;
    log.write_curve_csv(&out_dir.join("curve.csv"))?;
    save_checkpoint(&net, &out_dir.join("checkpoint.bin"))?;

    let report = arm_report(kind, &log, &net, &sequences, cfg.alpha)?;
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Config(format!("report serialization failed: {e}")))?;
    write_text(&out_dir.join("report.json"), &json)?;

    Ok(TrainOutcome {
        net,
        log,
        report,
        out_dir: out_dir.to_path_buf(),
    })
}

/// Train both arms from the same config and data, write per-arm artifacts
/// plus plot exports, and combine them into a comparison report.
///
/// With `serial` the arms run one after the other — use that whenever the
/// timing fields matter. Otherwise the arms run on two threads, which is
/// faster but lets them contend for cores.
pub fn run_compare(
    cfg: &ExperimentConfig,
    set: &SequenceSet,
    out_dir: &Path,
    serial: bool,
) -> Result<ComparisonReport> {
    cfg.validate()?;
    check_set_dims(cfg, set)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let mtrnn_dir = out_dir.join("mtrnn");
    let mtgru_dir = out_dir.join("mtgru");
    let (mtrnn_outcome, mtgru_outcome) = if serial {
        (
            run_train(cfg, CellKind::Mtrnn, set, &mtrnn_dir)?,
            run_train(cfg, CellKind::Mtgru, set, &mtgru_dir)?,
        )
    } else {
        std::thread::scope(|scope| -> Result<(TrainOutcome, TrainOutcome)> {
            let a = scope.spawn(|| run_train(cfg, CellKind::Mtrnn, set, &mtrnn_dir));
            let b = scope.spawn(|| run_train(cfg, CellKind::Mtgru, set, &mtgru_dir));
            let a = a.join().expect("mtrnn arm panicked")?;
            let b = b.join().expect("mtgru arm panicked")?;
            Ok((a, b))
        })?
    };

    // Plot exports per arm: curve plus rollout views of the first sequence.
    for outcome in [&mtrnn_outcome, &mtgru_outcome] {
        let plots = outcome.out_dir.join("plots");
        export_plot_data(
            &PlotSource::Log(&outcome.log),
            PlotKind::TrainingCurve,
            &plots,
        )?;
        let seq = &set.sequences[0].data;
        let roll = run_sequence(&outcome.net, seq, cfg.alpha)?;
        for kind in [
            PlotKind::PredictionOverlay,
            PlotKind::ContextActivity,
            PlotKind::ContextPca,
        ] {
            export_plot_data(&PlotSource::Rollout { rollout: &roll, seq }, kind, &plots)?;
        }
    }

    let report = ComparisonReport::new(
        mtrnn_outcome.report,
        mtgru_outcome.report,
        cfg.alpha,
        cfg.alpha_direction.to_string(),
    );
    report.write_json(&out_dir.join("report.json"))?;
    Ok(report)
}

/// Load a checkpoint, roll it over the first sequence of `set`, and export
/// the requested rollout-based plot data into `out_dir`.
pub fn run_analyze(
    checkpoint: &Path,
    set: &SequenceSet,
    kind: PlotKind,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    if kind == PlotKind::TrainingCurve {
        return Err(Error::InvalidArgument(
            "training_curve is produced by the train command (curve.csv); \
             analyze exports rollout-based kinds"
                .into(),
        ));
    }
    let net = load_checkpoint(checkpoint)?;
    set.validate()?;
    if set.dims() != net.config().n_io {
        return Err(Error::ShapeMismatch {
            op: "analyze",
            left: format!("checkpoint with n_io={}", net.config().n_io),
            right: format!("dataset with {} dims", set.dims()),
        });
    }
    let seq = &set.sequences[0].data;
    let roll = run_sequence(&net, seq, net.config().alpha)?;
    export_plot_data(&PlotSource::Rollout { rollout: &roll, seq }, kind, out_dir)
}

/// The fixed small network + sequence the gradient-check command runs on:
/// 2 inputs, 10 fast and 3 slow units on time constants 2 and 3, weights
/// scaled up threefold, and a 20-step two-dimensional wave. The scaling and
/// the short time constants keep every block's gradients well above the
/// difference quotient's rounding noise, so the 1e-5 gate has orders of
/// magnitude of margin — any genuine backward-pass defect lands far outside
/// it.
pub fn grad_check_fixture(kind: CellKind) -> (Network, Matrix) {
    let cfg = NetworkConfig {
        n_io: 2,
        n_cf: 10,
        n_cs: 3,
        tau_f: 2.0,
        tau_s: 3.0,
        cell_kind: kind,
        alpha: 0.9,
        alpha_direction: AlphaDirection::Prediction,
        linear_readout: false,
        seed: 2026,
    };
    let mut net = build_network(&cfg).expect("fixture config is valid");
    for (_, w) in net.weight_blocks_mut() {
        for v in w.data_mut() {
            *v *= 3.0;
        }
    }
    let t = 20;
    let mut seq = Matrix::zeros(t, 2);
    for k in 0..t {
        seq.set(k, 0, 0.8 * (0.35 * k as f64 + 0.3).sin());
        seq.set(k, 1, 0.8 * (0.23 * k as f64 + 1.1).cos());
    }
    (net, seq)
}

/// One kind's gradient-check outcome.
pub struct GradCheckRun {
    pub kind: CellKind,
    pub report: GradCheckReport,
}

/// Run the gradient check on the fixed fixture for each requested kind.
/// `corrupt` switches to the sabotaged negative control that must fail.
pub fn run_grad_check(
    kinds: &[CellKind],
    epsilon: f64,
    coords_per_block: usize,
    corrupt: bool,
) -> Result<Vec<GradCheckRun>> {
    let mut runs = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let (net, seq) = grad_check_fixture(kind);
        let report = if corrupt {
            grad_check_sabotaged(&net, &seq, 0.9, epsilon, coords_per_block, 4242)?
        } else {
            grad_check(&net, &seq, 0.9, epsilon, coords_per_block, 4242)?
        };
        runs.push(GradCheckRun { kind, report });
    }
    Ok(runs)
}
