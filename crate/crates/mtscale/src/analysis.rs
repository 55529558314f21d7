//! Metrics, context-activity views, comparison reports, and plot-ready CSV
//! exports.
//!
//! Everything here is a pure function over finished rollouts and training
//! logs. Exports are plain CSV (comma headers, one record per line, `#`
//! comment lines for metadata) so any plotting tool can consume them; a
//! [`ComparisonReport`] additionally serializes to a single JSON file for
//! machine consumption.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{run_sequence, CellKind, Network, Rollout};
use crate::numerics::{pca_2d, Matrix};
use crate::training::{sequence_loss, write_text, TrainingLog};

/// Prediction-error summary of one rollout.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RmsReport {
    /// `sqrt(total_sq_error / ((T - 1) * D))`.
    pub per_element_rms: f64,
    /// Unhalved sum of squared residuals over all steps and dimensions.
    pub total_sq_error: f64,
}

/// Residual summary of a rollout against the sequence it predicted.
pub fn rms_report(roll: &Rollout, seq: &Matrix) -> Result<RmsReport> {
    let (_, per_step) = sequence_loss(roll, seq)?;
    let total_sq_error: f64 = per_step.iter().sum();
    let denom = (roll.predictions.rows() * roll.predictions.cols()) as f64;
    Ok(RmsReport {
        per_element_rms: (total_sq_error / denom).sqrt(),
        total_sq_error,
    })
}

/// One layer's activity reduced to two principal components.
#[derive(Debug, Clone)]
pub struct PcaView {
    /// Projected activity, `T x 2`.
    pub projected: Matrix,
    /// Fraction of total variance captured by each component.
    pub variance_fractions: [f64; 2],
    /// Set when the activity had no variance at all (constant layer); the
    /// projection is then identically zero.
    pub degenerate: bool,
}

fn pca_view(activity: &Matrix) -> Result<PcaView> {
    let pca = pca_2d(activity)?;
    let degenerate = pca.total_variance == 0.0;
    let fractions = if degenerate {
        [0.0, 0.0]
    } else {
        [
            pca.explained_variance[0] / pca.total_variance,
            pca.explained_variance[1] / pca.total_variance,
        ]
    };
    Ok(PcaView {
        projected: pca.projected,
        variance_fractions: fractions,
        degenerate,
    })
}

/// Two-component views of both context layers' activity.
#[derive(Debug, Clone)]
pub struct ContextPca {
    pub cf: PcaView,
    pub cs: PcaView,
}

/// Reduce both context layers of a rollout to two principal components
/// each; constant activity is flagged degenerate instead of erroring.
pub fn context_pca(roll: &Rollout) -> Result<ContextPca> {
    Ok(ContextPca {
        cf: pca_view(&roll.cf_activity)?,
        cs: pca_view(&roll.cs_activity)?,
    })
}

/// Elementwise min/max/span of one layer's activity.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RangeSummary {
    pub min: f64,
    pub max: f64,
    pub span: f64,
}

fn range_summary(m: &Matrix) -> RangeSummary {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in m.data() {
        min = min.min(v);
        max = max.max(v);
    }
    RangeSummary {
        min,
        max,
        span: max - min,
    }
}

/// Activity ranges of both context layers.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ActivityRange {
    pub cf: RangeSummary,
    pub cs: RangeSummary,
}

/// Exact activity extrema of a rollout, per layer.
pub fn activity_range(roll: &Rollout) -> ActivityRange {
    ActivityRange {
        cf: range_summary(&roll.cf_activity),
        cs: range_summary(&roll.cs_activity),
    }
}

/// The exportable plot datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Mean error per epoch.
    TrainingCurve,
    /// Real and predicted values per step.
    PredictionOverlay,
    /// Raw per-step context activations, one file per layer.
    ContextActivity,
    /// 2-component context projections, one file per layer.
    ContextPca,
}

pub const PLOT_KINDS: [(&str, PlotKind); 4] = [
    ("training_curve", PlotKind::TrainingCurve),
    ("prediction_overlay", PlotKind::PredictionOverlay),
    ("context_activity", PlotKind::ContextActivity),
    ("context_pca", PlotKind::ContextPca),
];

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<PlotKind> {
        PLOT_KINDS
            .iter()
            .find(|(name, _)| *name == s)
            .map(|(_, kind)| *kind)
            .ok_or_else(|| Error::UnknownPlotKind {
                given: s.to_string(),
                valid: PLOT_KINDS
                    .iter()
                    .map(|(name, _)| *name)
                    .collect::<Vec<_>>()
                    .join(", "),
            })
    }
}

impl std::fmt::Display for PlotKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = PLOT_KINDS
            .iter()
            .find(|(_, kind)| kind == self)
            .map(|(name, _)| *name)
            .unwrap_or("?");
        write!(f, "{name}")
    }
}

/// What a plot export reads from.
pub enum PlotSource<'a> {
    /// For [`PlotKind::TrainingCurve`].
    Log(&'a TrainingLog),
    /// For the rollout-based kinds; `seq` is the sequence that was rolled.
    Rollout { rollout: &'a Rollout, seq: &'a Matrix },
}

/// Write the requested dataset(s) into `out_dir` and return the file paths.
///
/// Files per kind: `training_curve` -> `curve.csv` (epoch, mean_error);
/// `prediction_overlay` -> `overlay.csv` (t, real_d*, pred_d*);
/// `context_activity` -> `cf_activity.csv` + `cs_activity.csv` (t, c*);
/// `context_pca` -> `cf_pca.csv` + `cs_pca.csv` (t, pc1, pc2 with the
/// variance fractions in a leading `#` comment).
pub fn export_plot_data(
    source: &PlotSource<'_>,
    kind: PlotKind,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    match (kind, source) {
        (PlotKind::TrainingCurve, PlotSource::Log(log)) => {
            let path = out_dir.join("curve.csv");
            log.write_curve_csv(&path)?;
            Ok(vec![path])
        }
        (PlotKind::PredictionOverlay, PlotSource::Rollout { rollout, seq }) => {
            let d = rollout.predictions.cols();
            if seq.cols() != d || seq.rows() != rollout.predictions.rows() + 1 {
                return Err(Error::ShapeMismatch {
                    op: "export_plot_data",
                    left: format!("rollout with {} x {} predictions", rollout.predictions.rows(), d),
                    right: format!("sequence {} x {}", seq.rows(), seq.cols()),
                });
            }
            let mut text = String::from("t");
            for j in 0..d {
                text.push_str(&format!(",real_d{j}"));
            }
            for j in 0..d {
                text.push_str(&format!(",pred_d{j}"));
            }
            text.push('\n');
            for s in 0..rollout.predictions.rows() {
                // Prediction at step s targets sequence row s + 1.
                text.push_str(&format!("{}", s + 1));
                for &v in seq.row(s + 1) {
                    text.push_str(&format!(",{v}"));
                }
                for &v in rollout.predictions.row(s) {
                    text.push_str(&format!(",{v}"));
                }
                text.push('\n');
            }
            let path = out_dir.join("overlay.csv");
            write_text(&path, &text)?;
            Ok(vec![path])
        }
        (PlotKind::ContextActivity, PlotSource::Rollout { rollout, .. }) => {
            let mut paths = Vec::new();
            for (name, m) in [("cf_activity.csv", &rollout.cf_activity), ("cs_activity.csv", &rollout.cs_activity)] {
                let mut text = String::from("t");
                for j in 0..m.cols() {
                    text.push_str(&format!(",c{j}"));
                }
                text.push('\n');
                for s in 0..m.rows() {
                    text.push_str(&format!("{}", s + 1));
                    for &v in m.row(s) {
                        text.push_str(&format!(",{v}"));
                    }
                    text.push('\n');
                }
                let path = out_dir.join(name);
                write_text(&path, &text)?;
                paths.push(path);
            }
            Ok(paths)
        }
        (PlotKind::ContextPca, PlotSource::Rollout { rollout, .. }) => {
            let pca = context_pca(rollout)?;
            let mut paths = Vec::new();
            for (name, view) in [("cf_pca.csv", &pca.cf), ("cs_pca.csv", &pca.cs)] {
                let mut text = format!(
                    "# variance_fractions,{},{},degenerate,{}\nt,pc1,pc2\n",
                    view.variance_fractions[0], view.variance_fractions[1], view.degenerate
                );
                for s in 0..view.projected.rows() {
                    text.push_str(&format!(
                        "{},{},{}\n",
                        s + 1,
                        view.projected.get(s, 0),
                        view.projected.get(s, 1)
                    ));
                }
                let path = out_dir.join(name);
                write_text(&path, &text)?;
                paths.push(path);
            }
            Ok(paths)
        }
        (PlotKind::TrainingCurve, _) => Err(Error::InvalidArgument(
            "training_curve export needs a training log source".into(),
        )),
        (_, PlotSource::Log(_)) => Err(Error::InvalidArgument(format!(
            "{kind} export needs a rollout source"
        ))),
    }
}

/// Evaluate a network over a whole set: pooled per-element RMS and total
/// squared error at the given blend ratio.
pub fn evaluate_set(net: &Network, sequences: &[Matrix], alpha: f64) -> Result<RmsReport> {
    if sequences.is_empty() {
        return Err(Error::InvalidArgument(
            "evaluate_set needs at least one sequence".into(),
        ));
    }
    let mut total_sq = 0.0;
    let mut elements = 0usize;
    for seq in sequences {
        let roll = run_sequence(net, seq, alpha)?;
        let report = rms_report(&roll, seq)?;
        total_sq += report.total_sq_error;
        elements += roll.predictions.rows() * roll.predictions.cols();
    }
    Ok(RmsReport {
        per_element_rms: (total_sq / elements as f64).sqrt(),
        total_sq_error: total_sq,
    })
}

/// One trained arm of a comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArmReport {
    pub cell_kind: String,
    /// Pooled per-element RMS over the whole set after training.
    pub final_rms: f64,
    /// Pooled summed squared error after training.
    pub final_total_sq_error: f64,
    /// Mean wall milliseconds per gradient step (total time / total steps),
    /// floored at one timer tick (1 ns) so a run too fast to measure still
    /// yields finite, positive ratios.
    pub mean_ms_per_step: f64,
    /// Median of the per-sequence-run average ms per step.
    pub median_ms_per_step: f64,
    pub gradient_steps: u64,
    pub epochs_run: usize,
    /// Mean error per epoch, in order.
    pub epoch_mean_error: Vec<f64>,
    /// Variance of epoch-to-epoch error deltas: low values mean the curve
    /// descends steadily rather than oscillating.
    pub epoch_delta_variance: f64,
}

/// Build one arm's report from its finished training log and final network.
pub fn arm_report(
    kind: CellKind,
    log: &TrainingLog,
    net: &Network,
    sequences: &[Matrix],
    alpha: f64,
) -> Result<ArmReport> {
    let eval = evaluate_set(net, sequences, alpha)?;
    let total_steps: u64 = log.runs.iter().map(|r| r.iterations).sum();
    let total_ms: f64 = log.runs.iter().map(|r| r.millis).sum();
    let mut per_run_avg: Vec<f64> = log
        .runs
        .iter()
        .map(|r| r.millis / r.iterations as f64)
        .collect();
    per_run_avg.sort_by(|a, b| a.total_cmp(b));
    let median = if per_run_avg.is_empty() {
        f64::NAN
    } else {
        let mid = per_run_avg.len() / 2;
        if per_run_avg.len() % 2 == 1 {
            per_run_avg[mid]
        } else {
            0.5 * (per_run_avg[mid - 1] + per_run_avg[mid])
        }
    };
    let deltas: Vec<f64> = log
        .epoch_mean_error
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect();
    let delta_var = if deltas.len() < 2 {
        0.0
    } else {
        let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
        deltas.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (deltas.len() - 1) as f64
    };
    Ok(ArmReport {
        cell_kind: kind.to_string(),
        final_rms: eval.per_element_rms,
        final_total_sq_error: eval.total_sq_error,
        mean_ms_per_step: (total_ms / total_steps as f64).max(1e-6),
        median_ms_per_step: median,
        gradient_steps: total_steps,
        epochs_run: log.epoch_mean_error.len(),
        epoch_mean_error: log.epoch_mean_error.clone(),
        epoch_delta_variance: delta_var,
    })
}

/// Both arms plus the derived ratios.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub mtrnn: ArmReport,
    pub mtgru: ArmReport,
    /// `mtgru.mean_ms_per_step / mtrnn.mean_ms_per_step`.
    pub time_ratio: f64,
    /// `mtgru.final_rms / mtrnn.final_rms`.
    pub error_ratio: f64,
    pub alpha: f64,
    pub alpha_direction: String,
}

impl ComparisonReport {
    pub fn new(mtrnn: ArmReport, mtgru: ArmReport, alpha: f64, alpha_direction: String) -> Self {
        let time_ratio = mtgru.mean_ms_per_step / mtrnn.mean_ms_per_step;
        let error_ratio = mtgru.final_rms / mtrnn.final_rms;
        ComparisonReport {
            mtrnn,
            mtgru,
            time_ratio,
            error_ratio,
            alpha,
            alpha_direction,
        }
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("report serialization failed: {e}")))?;
        write_text(path, &json)
    }

    pub fn read_json(path: &Path) -> Result<ComparisonReport> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::CorruptData {
            path: path.to_path_buf(),
            reason: format!("report does not parse: {e}"),
        })
    }
}
