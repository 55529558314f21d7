//! Multi-timescale recurrent network toolkit.
//!
//! This crate implements and compares two recurrent units that integrate
//! inputs on per-layer time constants:
//!
//! * **MTRNN** — a leaky-integrator (continuous-time style) neuron whose
//!   membrane potential follows
//!   `u' = (1 - 1/tau) * u + (1/tau) * W x`, output `y = tanh(u')`;
//! * **MTGRU** — a gated recurrent unit whose state update is additionally
//!   low-pass filtered by a scalar time constant,
//!   `h' = ((1 - z) h + z u) / tau + (1 - 1/tau) h`.
//!
//! Both cells come with hand-derived exact backward passes; a three-layer
//! hierarchy (IO, fast context, slow context) composes them into a sequence
//! predictor trained by plain SGD with per-sequence early stopping. The
//! toolkit also ships the analytic two-sequence benchmark dataset, a
//! synthetic 43-dimensional multi-modal stand-in set, gradient-oracle
//! verification against central finite differences, RMS/timing comparison
//! reports and 2-D PCA projections of context-layer activity.
//!
//! Entry points:
//!
//! * [`cells`] — the two cell types, forward steps and backward passes;
//! * [`network`] — configuration, the layered network, rollouts, closed-loop
//!   generation and binary checkpoints;
//! * [`training`] — loss, BPTT, the early-stopping SGD driver and the
//!   gradient checker;
//! * [`data`] — dataset generation, command encoding and CSV persistence;
//! * [`analysis`] — RMS reports, activity PCA and plot-data export;
//! * [`experiment`] — config files, presets and the run directory layout
//!   backing the `mtscale` command-line tool.
//!
//! The `examples/` directory holds one runnable walkthrough per capability;
//! start with `cargo run --release --example train_case1`.

pub mod analysis;
pub mod cells;
pub mod data;
pub mod error;
pub mod experiment;
pub mod network;
pub mod numerics;
pub mod training;

pub use error::{Error, Result};
