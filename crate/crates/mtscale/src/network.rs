//! The three-layer prediction hierarchy and its persistence.
//!
//! Layers, bottom to top:
//!
//! * **IO** (`n_io` dims) — the raw sequence enters here; the network input
//!   at each step is squashed once, `x_cf = tanh(i_t)`.
//! * **Fast context Cf** (`n_cf` units, time constant `tau_f`) — the main
//!   recurrent layer.
//! * **Slow context Cs** (`n_cs` units, `tau_s`, `tau_s > tau_f`) — connects
//!   only with the fast layer and integrates slowly.
//!
//! The output is a trained linear readout of the fast layer squashed back
//! into IO range, `o_t = tanh(W_out y_cf)` (a raw linear readout is available
//! behind `linear_readout` for ablations). The slow layer's feedback into the
//! fast layer is one-step delayed, which keeps each step a single evaluation
//! per cell.
//!
//! Connectivity per cell kind: leaky-integrator (MTRNN) layers carry no
//! internal recurrence, so each layer's own previous output is part of its
//! input — the fast cell sees `[x_cf, y_cf_prev, y_cs_prev]` and the slow
//! cell `[y_cf, y_cs_prev]`, giving full connectivity to the same and
//! adjacent layers through the input weights. Gated (MTGRU) cells recur
//! internally through their `W_h*` blocks, so their inputs carry only the
//! adjacent layers: `[x_cf, y_cs_prev]` and `[y_cf]`.
//!
//! During a rollout the network input can be a blend of the real sequence
//! and its own previous prediction: `i_t = alpha * o_(t-1) + (1 - alpha) *
//! seq_t` (with `alpha_direction = "real"` the weights swap). `alpha = 0` is
//! teacher forcing, `alpha = 1` closed-loop generation.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cells::{
    mtgru_step, mtrnn_step, MtgruCell, MtgruGateTrace, MtgruState, MtrnnCell, MtrnnState,
};
use crate::error::{Error, Result};
use crate::numerics::{uniform_init, Matrix, Rng, Vector};

/// Which recurrent cell the two context layers use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Mtrnn,
    Mtgru,
}

impl std::fmt::Display for CellKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CellKind::Mtrnn => write!(f, "mtrnn"),
            CellKind::Mtgru => write!(f, "mtgru"),
        }
    }
}

/// Which side of the input blend `alpha` weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AlphaDirection {
    /// `i_t = alpha * o_(t-1) + (1 - alpha) * seq_t` (the default).
    #[default]
    Prediction,
    /// `i_t = (1 - alpha) * o_(t-1) + alpha * seq_t`.
    Real,
}

impl std::fmt::Display for AlphaDirection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AlphaDirection::Prediction => write!(f, "prediction"),
            AlphaDirection::Real => write!(f, "real"),
        }
    }
}

/// Structural and rollout configuration of a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub n_io: usize,
    pub n_cf: usize,
    pub n_cs: usize,
    pub tau_f: f64,
    pub tau_s: f64,
    pub cell_kind: CellKind,
    /// Prediction/real blend ratio in `[0, 1]`.
    pub alpha: f64,
    #[serde(default)]
    pub alpha_direction: AlphaDirection,
    /// Skip the tanh on the readout (ablation flag; presets keep it off).
    #[serde(default)]
    pub linear_readout: bool,
    pub seed: u64,
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        fn bail(msg: String) -> Result<()> {
            Err(Error::InvalidArgument(msg))
        }
        if self.n_io == 0 || self.n_cf == 0 || self.n_cs == 0 {
            return bail(format!(
                "layer sizes must be positive, got n_io={} n_cf={} n_cs={}",
                self.n_io, self.n_cf, self.n_cs
            ));
        }
        if self.tau_f.is_nan() || self.tau_f < 1.0 {
            return bail(format!("tau_f must be >= 1, got {}", self.tau_f));
        }
        if self.tau_s.is_nan() || self.tau_s < 1.0 {
            return bail(format!("tau_s must be >= 1, got {}", self.tau_s));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bail(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        Ok(())
    }

    /// Weight carried by the previous prediction when blending inputs.
    pub fn prediction_weight(&self, alpha: f64) -> f64 {
        match self.alpha_direction {
            AlphaDirection::Prediction => alpha,
            AlphaDirection::Real => 1.0 - alpha,
        }
    }

    /// Input widths of the two context cells for this configuration.
    fn cell_input_widths(&self) -> (usize, usize) {
        match self.cell_kind {
            // Leaky-integrator layers carry same-layer connectivity in their
            // input weights.
            CellKind::Mtrnn => (self.n_io + self.n_cf + self.n_cs, self.n_cf + self.n_cs),
            // Gated layers recur internally.
            CellKind::Mtgru => (self.n_io + self.n_cs, self.n_cf),
        }
    }
}

/// One context layer's cell, either kind.
#[derive(Debug, Clone)]
pub enum Cell {
    Mtrnn(MtrnnCell),
    Mtgru(MtgruCell),
}

impl Cell {
    pub fn n_units(&self) -> usize {
        match self {
            Cell::Mtrnn(c) => c.n_units(),
            Cell::Mtgru(c) => c.n_units(),
        }
    }

    pub fn n_inputs(&self) -> usize {
        match self {
            Cell::Mtrnn(c) => c.n_inputs(),
            Cell::Mtgru(c) => c.n_inputs(),
        }
    }

    /// Fresh zeroed gradient accumulator matching this cell.
    pub fn zero_gradients(&self) -> crate::cells::CellGradients {
        match self {
            Cell::Mtrnn(c) => crate::cells::CellGradients::Mtrnn(c.zero_gradients()),
            Cell::Mtgru(c) => crate::cells::CellGradients::Mtgru(c.zero_gradients()),
        }
    }

    fn weight_blocks(&self) -> Vec<(&'static str, &Matrix)> {
        match self {
            Cell::Mtrnn(c) => vec![("w", c.w())],
            Cell::Mtgru(c) => c.weight_blocks(),
        }
    }

    fn weight_blocks_mut(&mut self) -> Vec<(&'static str, &mut Matrix)> {
        match self {
            Cell::Mtrnn(c) => vec![("w", c.w_mut())],
            Cell::Mtgru(c) => c.weight_blocks_mut(),
        }
    }
}

/// State of one context layer.
#[derive(Debug, Clone, PartialEq)]
pub enum CellState {
    Mtrnn(MtrnnState),
    Mtgru(MtgruState),
}

impl CellState {
    fn zeros(kind: CellKind, n_units: usize) -> Self {
        match kind {
            CellKind::Mtrnn => CellState::Mtrnn(MtrnnState::zeros(n_units)),
            CellKind::Mtgru => CellState::Mtgru(MtgruState::zeros(n_units)),
        }
    }
}

/// Full rollout state: both layer states plus the one-step-delayed outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub cf_state: CellState,
    pub cs_state: CellState,
    /// Fast-layer output of the previous step (zeros at sequence start).
    pub y_cf_prev: Vector,
    /// Slow-layer output of the previous step (zeros at sequence start).
    pub y_cs_prev: Vector,
    /// Network output of the previous step (zeros at sequence start).
    pub last_output: Vector,
}

/// Per-step record of everything the exact backward pass needs.
#[derive(Debug, Clone)]
pub struct StepTrace {
    /// `tanh(i_t)`, the squashed network input.
    pub x_cf: Vector,
    /// Input vector handed to the fast cell.
    pub cf_input: Vector,
    pub cf_trace: CellStepTrace,
    pub y_cf: Vector,
    /// Input vector handed to the slow cell.
    pub cs_input: Vector,
    pub cs_trace: CellStepTrace,
    pub y_cs: Vector,
    /// Network output `o_t`.
    pub output: Vector,
}

/// Cell-kind-specific part of a step trace.
#[derive(Debug, Clone)]
pub enum CellStepTrace {
    /// The new membrane potential (the output tanh is re-derived from it).
    Mtrnn { u_next: Vector },
    /// Previous state plus gate activations.
    Mtgru {
        h_prev: Vector,
        gates: MtgruGateTrace,
    },
}

/// Everything recorded while rolling a network over one sequence.
#[derive(Debug, Clone)]
pub struct Rollout {
    /// One prediction row per executed step (`T - 1` rows for a length-`T`
    /// sequence); row `s` predicts sequence row `s + 1`.
    pub predictions: Matrix,
    /// Fast-layer output per step, same row count as `predictions`.
    pub cf_activity: Matrix,
    /// Slow-layer output per step, same row count as `predictions`.
    pub cs_activity: Matrix,
    /// The blend ratio this rollout ran with.
    pub alpha: f64,
    /// Effective weight of the previous prediction in the blend.
    pub prediction_weight: f64,
    pub traces: Vec<StepTrace>,
}

/// The layered network.
#[derive(Debug, Clone)]
pub struct Network {
    config: NetworkConfig,
    cf: Cell,
    cs: Cell,
    w_out: Matrix,
}

/// Build a network from its configuration. Weights are drawn from the seeded
/// generator, each block uniform in `+-1/sqrt(fan_in)`, in the fixed order
/// fast cell, slow cell, readout; the same config therefore always yields
/// bit-identical weights.
pub fn build_network(config: &NetworkConfig) -> Result<Network> {
    config.validate()?;
    let mut rng = Rng::new(config.seed);
    let (cf_in, cs_in) = config.cell_input_widths();
    let (cf, cs) = match config.cell_kind {
        CellKind::Mtrnn => (
            Cell::Mtrnn(MtrnnCell::init_uniform(
                &mut rng,
                config.n_cf,
                cf_in,
                config.tau_f,
            )?),
            Cell::Mtrnn(MtrnnCell::init_uniform(
                &mut rng,
                config.n_cs,
                cs_in,
                config.tau_s,
            )?),
        ),
        CellKind::Mtgru => (
            Cell::Mtgru(MtgruCell::init_uniform(
                &mut rng,
                config.n_cf,
                cf_in,
                config.tau_f,
            )?),
            Cell::Mtgru(MtgruCell::init_uniform(
                &mut rng,
                config.n_cs,
                cs_in,
                config.tau_s,
            )?),
        ),
    };
    let w_out = uniform_init(
        &mut rng,
        config.n_io,
        config.n_cf,
        1.0 / (config.n_cf as f64).sqrt(),
    )?;
    Ok(Network {
        config: config.clone(),
        cf,
        cs,
        w_out,
    })
}

impl Network {
    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn cf_cell(&self) -> &Cell {
        &self.cf
    }

    pub fn cs_cell(&self) -> &Cell {
        &self.cs
    }

    pub fn w_out(&self) -> &Matrix {
        &self.w_out
    }

    /// All trainable weight blocks with hierarchical names
    /// (`cf.w`, `cf.w_xr`, ..., `cs.w`, ..., `w_out`), in a fixed order.
    pub fn weight_blocks(&self) -> Vec<(String, &Matrix)> {
        let mut blocks = Vec::new();
        for (name, m) in self.cf.weight_blocks() {
            blocks.push((format!("cf.{name}"), m));
        }
        for (name, m) in self.cs.weight_blocks() {
            blocks.push((format!("cs.{name}"), m));
        }
        blocks.push(("w_out".to_string(), &self.w_out));
        blocks
    }

    /// Mutable access to the same blocks, same names and order.
    pub fn weight_blocks_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        let mut blocks = Vec::new();
        for (name, m) in self.cf.weight_blocks_mut() {
            blocks.push((format!("cf.{name}"), m));
        }
        for (name, m) in self.cs.weight_blocks_mut() {
            blocks.push((format!("cs.{name}"), m));
        }
        blocks.push(("w_out".to_string(), &mut self.w_out));
        blocks
    }

    /// Fresh all-zero state (both layer states and the delayed outputs).
    pub fn initial_state(&self) -> NetworkState {
        NetworkState {
            cf_state: CellState::zeros(self.config.cell_kind, self.config.n_cf),
            cs_state: CellState::zeros(self.config.cell_kind, self.config.n_cs),
            y_cf_prev: Vector::zeros(self.config.n_cf),
            y_cs_prev: Vector::zeros(self.config.n_cs),
            last_output: Vector::zeros(self.config.n_io),
        }
    }
}

/// Advance the network one step. Pure in `(net, i_t, state)`: identical
/// arguments give identical results.
pub fn forward_step(
    net: &Network,
    i_t: &Vector,
    state: &NetworkState,
) -> Result<(Vector, NetworkState, StepTrace)> {
    let cfg = &net.config;
    if i_t.len() != cfg.n_io {
        return Err(Error::ShapeMismatch {
            op: "forward_step",
            left: format!("network with n_io={}", cfg.n_io),
            right: format!("input of length {}", i_t.len()),
        });
    }

    // IO layer squash.
    let x_cf = Vector::from_vec(i_t.iter().map(|v| v.tanh()).collect());

    // Fast layer.
    let cf_input = match cfg.cell_kind {
        CellKind::Mtrnn => concat3(&x_cf, &state.y_cf_prev, &state.y_cs_prev),
        CellKind::Mtgru => concat2(&x_cf, &state.y_cs_prev),
    };
    let (cf_state, cf_trace, y_cf) = step_cell(&net.cf, &cf_input, &state.cf_state)?;

    // Slow layer.
    let cs_input = match cfg.cell_kind {
        CellKind::Mtrnn => concat2(&y_cf, &state.y_cs_prev),
        CellKind::Mtgru => y_cf.clone(),
    };
    let (cs_state, cs_trace, y_cs) = step_cell(&net.cs, &cs_input, &state.cs_state)?;

    // Readout.
    let mut output = Vector::zeros(cfg.n_io);
    net.w_out
        .matvec_into(y_cf.as_slice(), output.as_mut_slice());
    if !cfg.linear_readout {
        for d in 0..cfg.n_io {
            output[d] = output[d].tanh();
        }
    }

    let new_state = NetworkState {
        cf_state,
        cs_state,
        y_cf_prev: y_cf.clone(),
        y_cs_prev: y_cs.clone(),
        last_output: output.clone(),
    };
    let trace = StepTrace {
        x_cf,
        cf_input,
        cf_trace,
        y_cf,
        cs_input,
        cs_trace,
        y_cs,
        output: output.clone(),
    };
    Ok((output, new_state, trace))
}

fn step_cell(cell: &Cell, input: &Vector, state: &CellState) -> Result<(CellState, CellStepTrace, Vector)> {
    match (cell, state) {
        (Cell::Mtrnn(c), CellState::Mtrnn(s)) => {
            let (next, y) = mtrnn_step(c, input, s)?;
            let trace = CellStepTrace::Mtrnn {
                u_next: next.u.clone(),
            };
            Ok((CellState::Mtrnn(next), trace, y))
        }
        (Cell::Mtgru(c), CellState::Mtgru(s)) => {
            let (next, gates) = mtgru_step(c, input, s)?;
            let y = next.h.clone();
            let trace = CellStepTrace::Mtgru {
                h_prev: s.h.clone(),
                gates,
            };
            Ok((CellState::Mtgru(next), trace, y))
        }
        _ => Err(Error::InvalidArgument(
            "cell state kind does not match cell kind".into(),
        )),
    }
}

fn concat2(a: &Vector, b: &Vector) -> Vector {
    let mut out = Vec::with_capacity(a.len() + b.len());
    out.extend_from_slice(a.as_slice());
    out.extend_from_slice(b.as_slice());
    Vector::from_vec(out)
}

fn concat3(a: &Vector, b: &Vector, c: &Vector) -> Vector {
    let mut out = Vec::with_capacity(a.len() + b.len() + c.len());
    out.extend_from_slice(a.as_slice());
    out.extend_from_slice(b.as_slice());
    out.extend_from_slice(c.as_slice());
    Vector::from_vec(out)
}

/// Roll the network over `seq` (`T x n_io`, `T >= 2`), blending inputs with
/// ratio `alpha`: the first input is sequence row 0; afterwards the previous
/// prediction is blended in. The prediction at step `s` targets sequence row
/// `s + 1`, so the rollout has `T - 1` steps. Initial states are zeros.
pub fn run_sequence(net: &Network, seq: &Matrix, alpha: f64) -> Result<Rollout> {
    let cfg = &net.config;
    if seq.cols() != cfg.n_io {
        return Err(Error::ShapeMismatch {
            op: "run_sequence",
            left: format!("network with n_io={}", cfg.n_io),
            right: format!("sequence with {} columns", seq.cols()),
        });
    }
    if seq.rows() < 2 {
        return Err(Error::InvalidArgument(format!(
            "run_sequence needs at least 2 rows (one prediction target), got {}",
            seq.rows()
        )));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    let steps = seq.rows() - 1;
    let w_pred = cfg.prediction_weight(alpha);
    let w_real = 1.0 - w_pred;

    let mut predictions = Matrix::zeros(steps, cfg.n_io);
    let mut cf_activity = Matrix::zeros(steps, cfg.n_cf);
    let mut cs_activity = Matrix::zeros(steps, cfg.n_cs);
    let mut traces = Vec::with_capacity(steps);

    let mut state = net.initial_state();
    let mut input = Vector::from_slice(seq.row(0));
    for s in 0..steps {
        if s > 0 {
            let prev = &state.last_output;
            let real = seq.row(s);
            for d in 0..cfg.n_io {
                input[d] = w_pred * prev[d] + w_real * real[d];
            }
        }
        let (output, next_state, trace) = forward_step(net, &input, &state)?;
        predictions.row_mut(s).copy_from_slice(output.as_slice());
        cf_activity.row_mut(s).copy_from_slice(trace.y_cf.as_slice());
        cs_activity.row_mut(s).copy_from_slice(trace.y_cs.as_slice());
        traces.push(trace);
        state = next_state;
    }
    Ok(Rollout {
        predictions,
        cf_activity,
        cs_activity,
        alpha,
        prediction_weight: w_pred,
        traces,
    })
}

/// Free-run the network for `steps` steps from `initial_input`, feeding each
/// prediction back as the next input. Equivalent to `run_sequence` with
/// `alpha = 1` (prediction direction) on a sequence whose only known row is
/// the initial input.
pub fn generate_closed_loop(net: &Network, initial_input: &Vector, steps: usize) -> Result<Matrix> {
    if steps == 0 {
        return Err(Error::InvalidArgument(
            "generate_closed_loop needs steps >= 1".into(),
        ));
    }
    let mut out = Matrix::zeros(steps, net.config.n_io);
    let mut state = net.initial_state();
    let mut input = initial_input.clone();
    for s in 0..steps {
        let (output, next_state, _) = forward_step(net, &input, &state)?;
        out.row_mut(s).copy_from_slice(output.as_slice());
        input = output;
        state = next_state;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

/// Leading bytes of every checkpoint file.
pub const CHECKPOINT_MAGIC: &[u8; 8] = b"MTSCALE1";
/// Bumped whenever the header or payload layout changes.
pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointHeader {
    format_version: u32,
    config: NetworkConfig,
    blocks: Vec<BlockDescriptor>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct BlockDescriptor {
    name: String,
    rows: usize,
    cols: usize,
}

/// Write the network to `path`.
///
/// Layout: the 8-byte magic `MTSCALE1`, a little-endian u32 header length, a
/// JSON header (format version, full config, ordered block descriptors),
/// then every weight block's entries row-major as little-endian f64. The
/// encoding is canonical, so save -> load -> save reproduces the file
/// byte for byte.
pub fn save_checkpoint(net: &Network, path: &Path) -> Result<()> {
    let blocks = net.weight_blocks();
    let header = CheckpointHeader {
        format_version: CHECKPOINT_FORMAT_VERSION,
        config: net.config.clone(),
        blocks: blocks
            .iter()
            .map(|(name, m)| BlockDescriptor {
                name: name.clone(),
                rows: m.rows(),
                cols: m.cols(),
            })
            .collect(),
    };
    let header_bytes = serde_json::to_vec(&header)
        .map_err(|e| Error::Checkpoint(format!("header serialization failed: {e}")))?;

    let mut buf = Vec::new();
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    buf.extend_from_slice(&(header_bytes.len() as u32).to_le_bytes());
    buf.extend_from_slice(&header_bytes);
    for (_, m) in &blocks {
        for &v in m.data() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&buf).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Read a checkpoint back into a network. Validates the magic, format
/// version, header/config consistency and the exact payload length.
pub fn load_checkpoint(path: &Path) -> Result<Network> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .map_err(|e| Error::io(path, e))?
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;

    if bytes.len() < 12 || &bytes[..8] != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint(format!(
            "{} is not a checkpoint (bad magic)",
            path.display()
        )));
    }
    let header_len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let payload_start = 12 + header_len;
    if bytes.len() < payload_start {
        return Err(Error::Checkpoint(format!(
            "{} is truncated inside the header",
            path.display()
        )));
    }
    let header: CheckpointHeader = serde_json::from_slice(&bytes[12..payload_start])
        .map_err(|e| Error::Checkpoint(format!("bad header in {}: {e}", path.display())))?;
    if header.format_version != CHECKPOINT_FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported format version {} (this build reads {})",
            header.format_version, CHECKPOINT_FORMAT_VERSION
        )));
    }
    header.config.validate()?;

    // The expected block list is fully determined by the config; reject any
    // disagreement before touching the payload.
    let reference = build_network(&header.config)?;
    let expected: Vec<BlockDescriptor> = reference
        .weight_blocks()
        .iter()
        .map(|(name, m)| BlockDescriptor {
            name: name.clone(),
            rows: m.rows(),
            cols: m.cols(),
        })
        .collect();
    if header.blocks != expected {
        return Err(Error::Checkpoint(format!(
            "block table of {} does not match its config: header {:?} vs expected {:?}",
            path.display(),
            header.blocks,
            expected
        )));
    }

    let total_entries: usize = expected.iter().map(|b| b.rows * b.cols).sum();
    if bytes.len() != payload_start + total_entries * 8 {
        return Err(Error::Checkpoint(format!(
            "{} payload has {} bytes, expected {}",
            path.display(),
            bytes.len() - payload_start,
            total_entries * 8
        )));
    }

    let mut net = reference;
    let mut offset = payload_start;
    for (_, m) in net.weight_blocks_mut() {
        for v in m.data_mut() {
            *v = f64::from_le_bytes(bytes[offset..offset + 8].try_into().unwrap());
            offset += 8;
        }
    }
    Ok(net)
}

/// Load a checkpoint and insist it is structurally compatible with
/// `expected`: same layer sizes and cell kind. The error names both sides.
pub fn load_checkpoint_expecting(path: &Path, expected: &NetworkConfig) -> Result<Network> {
    let net = load_checkpoint(path)?;
    let c = net.config();
    if (c.n_io, c.n_cf, c.n_cs, c.cell_kind)
        != (expected.n_io, expected.n_cf, expected.n_cs, expected.cell_kind)
    {
        return Err(Error::Checkpoint(format!(
            "checkpoint {} holds a {} network with n_io={} n_cf={} n_cs={}, \
             but the requested config wants {} with n_io={} n_cf={} n_cs={}",
            path.display(),
            c.cell_kind,
            c.n_io,
            c.n_cf,
            c.n_cs,
            expected.cell_kind,
            expected.n_io,
            expected.n_cf,
            expected.n_cs,
        )));
    }
    Ok(net)
}
