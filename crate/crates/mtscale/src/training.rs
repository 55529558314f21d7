//! Training: exact backpropagation through time, per-sequence SGD with early
//! stopping, and finite-difference gradient verification.
//!
//! The loss over one rollout is the summed squared error
//! `L = 1/2 * sum_t sum_d (o_td - seq_(t+1)d)^2`. The backward pass is exact
//! for every path in the forward graph: the readout, both context cells,
//! the one-step-delayed inter- and intra-layer feedback, the IO squash, and
//! the contribution of each prediction to the next blended input when
//! `alpha > 0`.
//!
//! The training loop follows the per-sequence schedule: within an epoch each
//! sequence is taken in turn and optimized on its own until its error drops
//! to the threshold or the iteration budget runs out, i.e. iteration
//! continues only while `error > threshold` **and** `iteration <
//! max_iteration`. Every sequence therefore receives at least one update per
//! epoch, and a sequence that already meets the threshold stops after that
//! single iteration.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use crate::cells::{mtgru_backward_acc, mtrnn_backward_acc, CellGradients};
use crate::error::{Error, Result};
use crate::network::{run_sequence, Cell, CellStepTrace, Network, Rollout};
use crate::numerics::{relative_error, Matrix, Rng};

/// Hyperparameters of the SGD loop.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    /// Learning rate.
    pub eta: f64,
    /// Per-sequence error threshold that ends the inner loop early.
    pub threshold: f64,
    /// Per-sequence iteration budget within one epoch.
    pub max_iteration: u64,
    pub epochs: usize,
    /// Input blend ratio used for training rollouts.
    pub alpha: f64,
    /// When set, gradients with norm above 1 are rescaled to norm 1 before
    /// the update (off in the presets; a stabilizer for exploratory runs).
    pub clip_gradients: bool,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        fn bail(msg: String) -> Result<()> {
            Err(Error::InvalidArgument(msg))
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return bail(format!("eta must be positive and finite, got {}", self.eta));
        }
        if !(self.threshold.is_finite() && self.threshold >= 0.0) {
            return bail(format!(
                "threshold must be non-negative and finite, got {}",
                self.threshold
            ));
        }
        if self.max_iteration == 0 {
            return bail("max_iteration must be at least 1".into());
        }
        if self.epochs == 0 {
            return bail("epochs must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bail(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        Ok(())
    }
}

/// Gradients of the loss with respect to every trainable block.
#[derive(Debug, Clone)]
pub struct NetworkGradients {
    pub cf: CellGradients,
    pub cs: CellGradients,
    pub d_w_out: Matrix,
}

impl NetworkGradients {
    pub fn zeros_like(net: &Network) -> Self {
        NetworkGradients {
            cf: net.cf_cell().zero_gradients(),
            cs: net.cs_cell().zero_gradients(),
            d_w_out: Matrix::zeros(net.w_out().rows(), net.w_out().cols()),
        }
    }

    /// Named blocks in the same order as [`Network::weight_blocks`].
    pub fn weight_blocks(&self) -> Vec<(String, &Matrix)> {
        let mut blocks = Vec::new();
        for (name, m) in self.cf.weight_blocks() {
            blocks.push((format!("cf.{name}"), m));
        }
        for (name, m) in self.cs.weight_blocks() {
            blocks.push((format!("cs.{name}"), m));
        }
        blocks.push(("w_out".to_string(), &self.d_w_out));
        blocks
    }

    /// Squared Euclidean norm over all weight-gradient blocks.
    pub fn sq_norm(&self) -> f64 {
        self.cf.sq_norm() + self.cs.sq_norm() + self.d_w_out.sq_norm()
    }

    pub fn is_finite(&self) -> bool {
        self.weight_blocks().iter().all(|(_, m)| m.is_finite())
    }

    /// Multiply every weight-gradient block by `c`.
    pub fn scale(&mut self, c: f64) {
        for (_, m) in self.cf.weight_blocks_mut() {
            for v in m.data_mut() {
                *v *= c;
            }
        }
        for (_, m) in self.cs.weight_blocks_mut() {
            for v in m.data_mut() {
                *v *= c;
            }
        }
        for v in self.d_w_out.data_mut() {
            *v *= c;
        }
    }
}

/// Summed squared-error loss of a rollout against its sequence, plus the
/// per-step squared errors (unhalved, summed over dimensions).
pub fn sequence_loss(roll: &Rollout, seq: &Matrix) -> Result<(f64, Vec<f64>)> {
    if roll.predictions.rows() + 1 != seq.rows() || roll.predictions.cols() != seq.cols() {
        return Err(Error::ShapeMismatch {
            op: "sequence_loss",
            left: format!(
                "rollout of {} predictions x {} dims",
                roll.predictions.rows(),
                roll.predictions.cols()
            ),
            right: format!("sequence of {} rows x {} dims", seq.rows(), seq.cols()),
        });
    }
    let mut per_step = Vec::with_capacity(roll.predictions.rows());
    let mut total = 0.0;
    for s in 0..roll.predictions.rows() {
        let pred = roll.predictions.row(s);
        let target = seq.row(s + 1);
        let sq: f64 = pred
            .iter()
            .zip(target)
            .map(|(p, t)| (p - t) * (p - t))
            .sum();
        per_step.push(sq);
        total += sq;
    }
    Ok((0.5 * total, per_step))
}

/// Roll the network over `seq` and return `(loss, gradients, rollout)` with
/// the exact loss gradient for every weight block.
pub fn sequence_gradient(
    net: &Network,
    seq: &Matrix,
    alpha: f64,
) -> Result<(f64, NetworkGradients, Rollout)> {
    let roll = run_sequence(net, seq, alpha)?;
    let (loss, _) = sequence_loss(&roll, seq)?;
    let grads = backprop(net, seq, &roll)?;
    Ok((loss, grads, roll))
}

/// Backward pass over a finished rollout.
fn backprop(net: &Network, seq: &Matrix, roll: &Rollout) -> Result<NetworkGradients> {
    let cfg = net.config();
    let (n_io, n_cf, n_cs) = (cfg.n_io, cfg.n_cf, cfg.n_cs);
    let steps = roll.traces.len();
    let w_pred = roll.prediction_weight;
    let is_mtrnn = matches!(net.cf_cell(), Cell::Mtrnn(_));

    let mut grads = NetworkGradients::zeros_like(net);

    // Adjoints flowing backward across step boundaries.
    let mut g_cf_state = vec![0.0; n_cf]; // at the fast cell's internal state
    let mut g_cs_state = vec![0.0; n_cs]; // at the slow cell's internal state
    let mut g_cf_out = vec![0.0; n_cf]; // at y_cf via next step's fast input
    let mut g_cs_out = vec![0.0; n_cs]; // at y_cs via next step's inputs
    let mut g_o_alpha = vec![0.0; n_io]; // at o via the next blended input

    let mut g_pre = vec![0.0; n_io];
    let mut g_h_total = vec![0.0; n_cf.max(n_cs)];

    for s in (0..steps).rev() {
        let trace = &roll.traces[s];

        // Loss at this step plus the blend path from step s + 1.
        let target = seq.row(s + 1);
        for d in 0..n_io {
            let g_o = (trace.output[d] - target[d]) + g_o_alpha[d];
            g_pre[d] = if cfg.linear_readout {
                g_o
            } else {
                let o = trace.output[d];
                g_o * (1.0 - o * o)
            };
        }

        // Readout block and the gradient arriving at y_cf.
        grads.d_w_out.add_outer(&g_pre, trace.y_cf.as_slice());
        let mut g_ycf = std::mem::take(&mut g_cf_out);
        net.w_out().matvec_t_acc(&g_pre, &mut g_ycf);

        // Slow cell backward; splits its input gradient into the y_cf part
        // and (leaky kind only) the delayed y_cs part.
        let mut g_cs_out_new = vec![0.0; n_cs];
        match (net.cs_cell(), &mut grads.cs, &trace.cs_trace) {
            (Cell::Mtrnn(cell), CellGradients::Mtrnn(g), CellStepTrace::Mtrnn { u_next }) => {
                mtrnn_backward_acc(
                    cell,
                    trace.cs_input.as_slice(),
                    u_next.as_slice(),
                    &g_cs_state,
                    &g_cs_out,
                    g,
                );
                g_cs_state.copy_from_slice(g.d_state.as_slice());
                for i in 0..n_cf {
                    g_ycf[i] += g.d_x[i];
                }
                for i in 0..n_cs {
                    g_cs_out_new[i] = g.d_x[n_cf + i];
                }
            }
            (Cell::Mtgru(cell), CellGradients::Mtgru(g), CellStepTrace::Mtgru { h_prev, gates }) => {
                for i in 0..n_cs {
                    g_h_total[i] = g_cs_state[i] + g_cs_out[i];
                }
                mtgru_backward_acc(
                    cell,
                    trace.cs_input.as_slice(),
                    h_prev.as_slice(),
                    gates,
                    &g_h_total[..n_cs],
                    g,
                );
                g_cs_state.copy_from_slice(g.d_state.as_slice());
                for i in 0..n_cf {
                    g_ycf[i] += g.d_x[i];
                }
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "internal: gradient/trace kind does not match the network".into(),
                ))
            }
        }

        // Fast cell backward; splits its input gradient into the IO part,
        // (leaky kind only) the delayed y_cf part, and the delayed y_cs part.
        let mut g_cf_out_new = vec![0.0; n_cf];
        let g_xcf: Vec<f64>;
        match (net.cf_cell(), &mut grads.cf, &trace.cf_trace) {
            (Cell::Mtrnn(cell), CellGradients::Mtrnn(g), CellStepTrace::Mtrnn { u_next }) => {
                mtrnn_backward_acc(
                    cell,
                    trace.cf_input.as_slice(),
                    u_next.as_slice(),
                    &g_cf_state,
                    &g_ycf,
                    g,
                );
                g_cf_state.copy_from_slice(g.d_state.as_slice());
                g_xcf = g.d_x.as_slice()[..n_io].to_vec();
                for i in 0..n_cf {
                    g_cf_out_new[i] = g.d_x[n_io + i];
                }
                for i in 0..n_cs {
                    g_cs_out_new[i] += g.d_x[n_io + n_cf + i];
                }
            }
            (Cell::Mtgru(cell), CellGradients::Mtgru(g), CellStepTrace::Mtgru { h_prev, gates }) => {
                for i in 0..n_cf {
                    g_h_total[i] = g_cf_state[i] + g_ycf[i];
                }
                mtgru_backward_acc(
                    cell,
                    trace.cf_input.as_slice(),
                    h_prev.as_slice(),
                    gates,
                    &g_h_total[..n_cf],
                    g,
                );
                g_cf_state.copy_from_slice(g.d_state.as_slice());
                g_xcf = g.d_x.as_slice()[..n_io].to_vec();
                for i in 0..n_cs {
                    g_cs_out_new[i] += g.d_x[n_io + i];
                }
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "internal: gradient/trace kind does not match the network".into(),
                ))
            }
        }
        debug_assert!(is_mtrnn || g_cf_out_new.iter().all(|v| *v == 0.0));
        g_cf_out = g_cf_out_new;
        g_cs_out = g_cs_out_new;

        // Through the IO squash, then hand the blend path to step s - 1.
        if s > 0 && w_pred != 0.0 {
            for d in 0..n_io {
                let x = trace.x_cf[d];
                g_o_alpha[d] = w_pred * g_xcf[d] * (1.0 - x * x);
            }
        } else {
            g_o_alpha.iter_mut().for_each(|v| *v = 0.0);
        }
    }
    Ok(grads)
}

/// One SGD update on one sequence. Returns the loss measured **before** the
/// update (the quantity the early-stopping guard compares against the
/// threshold). Non-finite losses or gradients abort with a diagnostic error
/// rather than poisoning the weights.
pub fn sgd_iteration(net: &mut Network, seq: &Matrix, cfg: &TrainConfig) -> Result<f64> {
    let (loss, mut grads, _) = sequence_gradient(net, seq, cfg.alpha)?;
    if !loss.is_finite() {
        return Err(Error::NonFinite {
            what: "training loss".into(),
            op: "sgd_iteration".into(),
        });
    }
    if !grads.is_finite() {
        return Err(Error::NonFinite {
            what: "weight gradient".into(),
            op: "sgd_iteration".into(),
        });
    }
    if cfg.clip_gradients {
        let norm = grads.sq_norm().sqrt();
        if norm > 1.0 {
            grads.scale(1.0 / norm);
        }
    }
    let g_blocks = grads.weight_blocks();
    for ((w_name, w), (g_name, g)) in net.weight_blocks_mut().into_iter().zip(&g_blocks) {
        debug_assert_eq!(&w_name, g_name);
        w.scaled_add(-cfg.eta, g);
    }
    Ok(loss)
}

/// Outcome of one sequence's inner loop within an epoch.
#[derive(Debug, Clone)]
pub struct SequenceRun {
    pub epoch: usize,
    pub sequence: usize,
    /// SGD iterations actually executed (always at least 1).
    pub iterations: u64,
    /// Loss before the last executed update.
    pub error: f64,
    pub reached_threshold: bool,
    pub millis: f64,
}

/// One epoch: every sequence in turn, each trained until its error reaches
/// the threshold or its iteration budget runs out.
pub fn train_epoch(
    net: &mut Network,
    sequences: &[Matrix],
    cfg: &TrainConfig,
    epoch: usize,
) -> Result<Vec<SequenceRun>> {
    let mut runs = Vec::with_capacity(sequences.len());
    for (index, seq) in sequences.iter().enumerate() {
        let start = Instant::now();
        let mut iterations = 0u64;
        let error = loop {
            let error = sgd_iteration(net, seq, cfg)?;
            iterations += 1;
            if error <= cfg.threshold || iterations >= cfg.max_iteration {
                break error;
            }
        };
        runs.push(SequenceRun {
            epoch,
            sequence: index,
            iterations,
            error,
            reached_threshold: error <= cfg.threshold,
            millis: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    Ok(runs)
}

/// Complete record of a training run.
#[derive(Debug, Clone)]
pub struct TrainingLog {
    /// One entry per (epoch, sequence), in execution order.
    pub runs: Vec<SequenceRun>,
    /// Mean final error per epoch (the training curve).
    pub epoch_mean_error: Vec<f64>,
    pub total_iterations: u64,
    pub total_millis: f64,
}

impl TrainingLog {
    pub fn final_mean_error(&self) -> f64 {
        *self.epoch_mean_error.last().unwrap_or(&f64::NAN)
    }

    /// Per-sequence log as CSV: one row per (epoch, sequence) with the
    /// iterations used, the stopping error, and the mean wall milliseconds
    /// per iteration.
    pub fn write_log_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("epoch,seq_id,iterations,final_error,mean_iter_ms\n");
        for r in &self.runs {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.epoch,
                r.sequence,
                r.iterations,
                r.error,
                r.millis / r.iterations as f64
            ));
        }
        write_text(path, &out)
    }

    /// Training curve (mean error per epoch) as CSV.
    pub fn write_curve_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("epoch,mean_error\n");
        for (epoch, err) in self.epoch_mean_error.iter().enumerate() {
            out.push_str(&format!("{epoch},{err}\n"));
        }
        write_text(path, &out)
    }
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Run the full schedule: `epochs` passes over all sequences. Timing uses
/// the monotonic clock. With fixed inputs and a fixed starting network the
/// result is bit-for-bit reproducible.
pub fn train(net: &mut Network, sequences: &[Matrix], cfg: &TrainConfig) -> Result<TrainingLog> {
    cfg.validate()?;
    if sequences.is_empty() {
        return Err(Error::InvalidArgument(
            "train needs at least one sequence".into(),
        ));
    }
    for (i, seq) in sequences.iter().enumerate() {
        if seq.cols() != net.config().n_io {
            return Err(Error::ShapeMismatch {
                op: "train",
                left: format!("network with n_io={}", net.config().n_io),
                right: format!("sequence {i} with {} columns", seq.cols()),
            });
        }
    }
    let start = Instant::now();
    let mut runs = Vec::new();
    let mut epoch_mean_error = Vec::with_capacity(cfg.epochs);
    let mut total_iterations = 0u64;
    for epoch in 0..cfg.epochs {
        let epoch_runs = train_epoch(net, sequences, cfg, epoch)?;
        let mean = epoch_runs.iter().map(|r| r.error).sum::<f64>() / epoch_runs.len() as f64;
        epoch_mean_error.push(mean);
        total_iterations += epoch_runs.iter().map(|r| r.iterations).sum::<u64>();
        runs.extend(epoch_runs);
    }
    Ok(TrainingLog {
        runs,
        epoch_mean_error,
        total_iterations,
        total_millis: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Result of comparing analytic and finite-difference gradients for one
/// weight block.
#[derive(Debug, Clone)]
pub struct GradCheckBlock {
    pub name: String,
    pub coords_checked: usize,
    pub max_rel_error: f64,
    pub mean_rel_error: f64,
    /// Flat (row-major) index of the worst coordinate in this block.
    pub worst_index: usize,
    pub worst_analytic: f64,
    pub worst_fd: f64,
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub blocks: Vec<GradCheckBlock>,
    pub max_rel_error: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub coords_per_block: usize,
}

impl GradCheckReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_rel_error < tolerance
    }
}

/// Verify the analytic gradient against central differences.
///
/// For every weight block, `coords_per_block` coordinates are drawn with
/// replacement from the seeded generator; each is perturbed by `+-epsilon`
/// and the loss difference quotient is compared with the analytic entry
/// using the relative error `|a - b| / max(|a|, |b|, 1e-8)`.
pub fn grad_check(
    net: &Network,
    seq: &Matrix,
    alpha: f64,
    epsilon: f64,
    coords_per_block: usize,
    seed: u64,
) -> Result<GradCheckReport> {
    let (_, analytic, _) = sequence_gradient(net, seq, alpha)?;
    grad_check_against(net, seq, alpha, epsilon, coords_per_block, seed, &analytic)
}

/// Negative control for the gradient-check gate: runs the identical
/// comparison but against deliberately corrupted backward-pass output
/// (every entry biased), so the check **must** fail. Exists so the failure
/// path of the gate can itself be exercised end to end.
#[doc(hidden)]
pub fn grad_check_sabotaged(
    net: &Network,
    seq: &Matrix,
    alpha: f64,
    epsilon: f64,
    coords_per_block: usize,
    seed: u64,
) -> Result<GradCheckReport> {
    let (_, mut analytic, _) = sequence_gradient(net, seq, alpha)?;
    for (_, m) in analytic.cf.weight_blocks_mut() {
        for v in m.data_mut() {
            *v = *v * 1.1 + 1e-3;
        }
    }
    for (_, m) in analytic.cs.weight_blocks_mut() {
        for v in m.data_mut() {
            *v = *v * 1.1 + 1e-3;
        }
    }
    for v in analytic.d_w_out.data_mut() {
        *v = *v * 1.1 + 1e-3;
    }
    grad_check_against(net, seq, alpha, epsilon, coords_per_block, seed, &analytic)
}

fn grad_check_against(
    net: &Network,
    seq: &Matrix,
    alpha: f64,
    epsilon: f64,
    coords_per_block: usize,
    seed: u64,
    analytic: &NetworkGradients,
) -> Result<GradCheckReport> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    if coords_per_block == 0 {
        return Err(Error::InvalidArgument(
            "coords_per_block must be at least 1".into(),
        ));
    }
    let analytic_blocks = analytic.weight_blocks();
    let n_blocks = analytic_blocks.len();

    let mut rng = Rng::new(seed);
    let mut work = net.clone();
    let mut blocks = Vec::with_capacity(n_blocks);
    let mut overall_max: f64 = 0.0;
    for b in 0..n_blocks {
        let (name, g_block) = &analytic_blocks[b];
        let entries = g_block.rows() * g_block.cols();
        let mut max_rel: f64 = 0.0;
        let mut sum_rel = 0.0;
        let mut worst = (0usize, 0.0f64, 0.0f64);
        for _ in 0..coords_per_block {
            let idx = rng.below(entries);
            let original = work.weight_blocks()[b].1.data()[idx];
            work.weight_blocks_mut()[b].1.data_mut()[idx] = original + epsilon;
            let plus = rollout_loss(&work, seq, alpha)?;
            work.weight_blocks_mut()[b].1.data_mut()[idx] = original - epsilon;
            let minus = rollout_loss(&work, seq, alpha)?;
            work.weight_blocks_mut()[b].1.data_mut()[idx] = original;
            let fd = (plus - minus) / (2.0 * epsilon);
            let analytic_value = g_block.data()[idx];
            let rel = relative_error(fd, analytic_value);
            if rel > max_rel {
                max_rel = rel;
                worst = (idx, analytic_value, fd);
            }
            sum_rel += rel;
        }
        overall_max = overall_max.max(max_rel);
        blocks.push(GradCheckBlock {
            name: name.clone(),
            coords_checked: coords_per_block,
            max_rel_error: max_rel,
            mean_rel_error: sum_rel / coords_per_block as f64,
            worst_index: worst.0,
            worst_analytic: worst.1,
            worst_fd: worst.2,
        });
    }
    Ok(GradCheckReport {
        blocks,
        max_rel_error: overall_max,
        epsilon,
        alpha,
        coords_per_block,
    })
}

fn rollout_loss(net: &Network, seq: &Matrix, alpha: f64) -> Result<f64> {
    let roll = run_sequence(net, seq, alpha)?;
    Ok(sequence_loss(&roll, seq)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_network, AlphaDirection, CellKind, NetworkConfig};

    fn tiny_config(kind: CellKind, alpha: f64) -> NetworkConfig {
        NetworkConfig {
            n_io: 2,
            n_cf: 5,
            n_cs: 3,
            tau_f: 2.0,
            tau_s: 5.0,
            cell_kind: kind,
            alpha,
            alpha_direction: AlphaDirection::Prediction,
            linear_readout: false,
            seed: 7,
        }
    }

    fn wave_seq(t: usize, d: usize) -> Matrix {
        let mut m = Matrix::zeros(t, d);
        for k in 0..t {
            for j in 0..d {
                m.set(k, j, 0.8 * (0.35 * k as f64 + 1.3 * j as f64).sin());
            }
        }
        m
    }

    /// Fixture for finite-difference checks: longer sequence, faster slow
    /// layer and rescaled weights so every block's gradients stay well above
    /// the difference quotient's rounding noise.
    fn conditioned_net(kind: CellKind, alpha: f64) -> (crate::network::Network, Matrix) {
        let mut cfg = tiny_config(kind, alpha);
        cfg.tau_s = 3.0;
        let mut net = build_network(&cfg).unwrap();
        for (_, w) in net.weight_blocks_mut() {
            for v in w.data_mut() {
                *v *= 3.0;
            }
        }
        (net, wave_seq(10, 2))
    }

    fn base_train_config(alpha: f64) -> TrainConfig {
        TrainConfig {
            eta: 0.01,
            threshold: 1e-3,
            max_iteration: 5,
            epochs: 2,
            alpha,
            clip_gradients: false,
        }
    }

    /// loss = 1/2 * ((1-0)^2 + (2-0)^2) = 2.5 for a single-step rollout.
    #[test]
    fn loss_matches_hand_arithmetic() {
        let roll = Rollout {
            predictions: Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap(),
            cf_activity: Matrix::zeros(1, 1),
            cs_activity: Matrix::zeros(1, 1),
            alpha: 0.0,
            prediction_weight: 0.0,
            traces: vec![],
        };
        let seq = Matrix::from_rows(&[vec![9.0, 9.0], vec![0.0, 0.0]]).unwrap();
        let (loss, per_step) = sequence_loss(&roll, &seq).unwrap();
        assert_eq!(loss, 2.5);
        assert_eq!(per_step, vec![5.0]);

        let short = Matrix::from_rows(&[vec![0.0, 0.0]]).unwrap();
        assert!(sequence_loss(&roll, &short).is_err());
    }

    /// Full-rollout gradients match central differences for every block,
    /// teacher-forced (alpha = 0), both cell kinds.
    #[test]
    fn gradient_matches_central_differences_teacher_forced() {
        for kind in [CellKind::Mtrnn, CellKind::Mtgru] {
            let (net, seq) = conditioned_net(kind, 0.0);
            let report = grad_check(&net, &seq, 0.0, 1e-5, 60, 99).unwrap();
            assert!(
                report.max_rel_error < 1e-5,
                "{kind}: max relative error {}",
                report.max_rel_error
            );
        }
    }

    /// With alpha > 0 each prediction feeds the next input; the backward
    /// pass must track that path too.
    #[test]
    fn gradient_matches_central_differences_with_alpha_feedback() {
        for kind in [CellKind::Mtrnn, CellKind::Mtgru] {
            let (net, seq) = conditioned_net(kind, 0.9);
            let report = grad_check(&net, &seq, 0.9, 1e-5, 60, 123).unwrap();
            assert!(
                report.max_rel_error < 1e-5,
                "{kind}: max relative error {}",
                report.max_rel_error
            );
        }
    }

    /// The real-direction blend swaps the roles of alpha and 1 - alpha.
    #[test]
    fn gradient_matches_central_differences_real_direction() {
        let (mut net, seq) = conditioned_net(CellKind::Mtgru, 0.2);
        let mut cfg = net.config().clone();
        cfg.alpha_direction = AlphaDirection::Real;
        let blocks: Vec<Vec<f64>> = net.weight_blocks().iter().map(|(_, w)| w.data().to_vec()).collect();
        net = build_network(&cfg).unwrap();
        for ((_, w), saved) in net.weight_blocks_mut().into_iter().zip(&blocks) {
            w.data_mut().copy_from_slice(saved);
        }
        let report = grad_check(&net, &seq, 0.2, 1e-5, 40, 5).unwrap();
        assert!(report.max_rel_error < 1e-5, "{}", report.max_rel_error);
    }

    /// An unreachable threshold exhausts the budget; a huge threshold stops
    /// after exactly one iteration. Either way at least one update happens.
    #[test]
    fn early_stopping_guard_bounds_iterations() {
        let seq = vec![wave_seq(6, 2), wave_seq(7, 2)];
        for (threshold, expected) in [(0.0, 5u64), (1e9, 1u64)] {
            let mut net = build_network(&tiny_config(CellKind::Mtrnn, 0.9)).unwrap();
            let mut cfg = base_train_config(0.9);
            cfg.threshold = threshold;
            cfg.epochs = 1;
            let log = train(&mut net, &seq, &cfg).unwrap();
            for run in &log.runs {
                assert_eq!(run.iterations, expected);
            }
        }
    }

    #[test]
    fn training_reduces_error_and_is_deterministic() {
        let seqs = vec![wave_seq(12, 2)];
        let cfg = TrainConfig {
            eta: 0.05,
            threshold: 1e-6,
            max_iteration: 40,
            epochs: 3,
            alpha: 0.0,
            clip_gradients: false,
        };
        for kind in [CellKind::Mtrnn, CellKind::Mtgru] {
            let mut net_a = build_network(&tiny_config(kind, 0.0)).unwrap();
            let log_a = train(&mut net_a, &seqs, &cfg).unwrap();
            assert!(
                log_a.final_mean_error() < log_a.epoch_mean_error[0],
                "{kind}: {:?}",
                log_a.epoch_mean_error
            );

            let mut net_b = build_network(&tiny_config(kind, 0.0)).unwrap();
            let log_b = train(&mut net_b, &seqs, &cfg).unwrap();
            assert_eq!(log_a.epoch_mean_error, log_b.epoch_mean_error);
            for ((_, wa), (_, wb)) in net_a.weight_blocks().iter().zip(net_b.weight_blocks()) {
                assert_eq!(wa.data(), wb.data());
            }
        }
    }

    #[test]
    fn non_finite_weights_are_reported_not_propagated() {
        let mut net = build_network(&tiny_config(CellKind::Mtgru, 0.0)).unwrap();
        net.weight_blocks_mut()[0].1.data_mut()[0] = f64::NAN;
        let seq = wave_seq(6, 2);
        let err = sgd_iteration(&mut net, &seq, &base_train_config(0.0)).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    /// With clipping on, an oversized gradient moves the weights by exactly
    /// eta in Euclidean norm.
    #[test]
    fn clipping_caps_the_update_norm() {
        let mut cfg = tiny_config(CellKind::Mtrnn, 0.0);
        cfg.linear_readout = true; // easy way to get a large loss and gradient
        let mut net = build_network(&cfg).unwrap();
        for (_, w) in net.weight_blocks_mut() {
            for v in w.data_mut() {
                *v *= 20.0;
            }
        }
        let seq = wave_seq(6, 2);
        let (_, grads, _) = sequence_gradient(&net, &seq, 0.0).unwrap();
        assert!(grads.sq_norm().sqrt() > 1.0);

        let before: Vec<Vec<f64>> = net.weight_blocks().iter().map(|(_, w)| w.data().to_vec()).collect();
        let mut tc = base_train_config(0.0);
        tc.clip_gradients = true;
        tc.eta = 0.125;
        sgd_iteration(&mut net, &seq, &tc).unwrap();
        let moved_sq: f64 = net
            .weight_blocks()
            .iter()
            .zip(&before)
            .map(|((_, w), old)| {
                w.data()
                    .iter()
                    .zip(old)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            })
            .sum();
        assert!((moved_sq.sqrt() - 0.125).abs() < 1e-9, "{}", moved_sq.sqrt());
    }

    #[test]
    fn csv_writers_produce_expected_headers() {
        let dir = tempfile::tempdir().unwrap();
        let mut net = build_network(&tiny_config(CellKind::Mtrnn, 0.9)).unwrap();
        let log = train(&mut net, &[wave_seq(6, 2)], &base_train_config(0.9)).unwrap();
        let log_path = dir.path().join("log.csv");
        let curve_path = dir.path().join("curve.csv");
        log.write_log_csv(&log_path).unwrap();
        log.write_curve_csv(&curve_path).unwrap();

        let log_text = std::fs::read_to_string(&log_path).unwrap();
        assert!(log_text.starts_with("epoch,seq_id,iterations,final_error,mean_iter_ms\n"));
        assert_eq!(log_text.lines().count(), 1 + log.runs.len());
        let curve_text = std::fs::read_to_string(&curve_path).unwrap();
        assert!(curve_text.starts_with("epoch,mean_error\n"));
        assert_eq!(curve_text.lines().count(), 1 + 2);
    }

    /// A rollout's per-step errors feed the loss; a mismatched sequence is
    /// rejected rather than silently truncated.
    #[test]
    fn train_rejects_mismatched_sequences() {
        let mut net = build_network(&tiny_config(CellKind::Mtrnn, 0.0)).unwrap();
        let bad = wave_seq(6, 3);
        assert!(train(&mut net, &[bad], &base_train_config(0.0)).is_err());
        assert!(train(&mut net, &[], &base_train_config(0.0)).is_err());
    }
}

