//! The two recurrent cell types and their exact backward passes.
//!
//! Both cells integrate on a time constant `tau`:
//!
//! * [`MtrnnCell`] keeps a membrane potential per neuron,
//!   `u' = (1 - 1/tau_i) u + (1/tau_i) (W x)`, and emits `y = tanh(u')`.
//!   `tau` is per-neuron (layers set all neurons of a layer equal).
//! * [`MtgruCell`] is a gated unit (reset `r`, update `z`, candidate `u`)
//!   whose state change is additionally low-pass filtered by a scalar `tau`:
//!   `h' = ((1 - z) h + z u) (1/tau) + (1 - 1/tau) h`. No bias terms.
//!
//! Backward passes are hand-derived and return exact gradients for every
//! weight matrix, the input vector and the previous state; they are verified
//! against central finite differences in the test suites. `tau = +inf`
//! (so `1/tau == 0`) is accepted as a diagnostic mode in which the state is
//! frozen exactly.

mod mtgru;
mod mtrnn;

pub use mtgru::{mtgru_backward, mtgru_step, MtgruCell, MtgruGateTrace, MtgruGradients, MtgruState};
pub use mtrnn::{mtrnn_backward, mtrnn_step, MtrnnCell, MtrnnGradients, MtrnnState};
pub(crate) use mtgru::mtgru_backward_acc;
pub(crate) use mtrnn::mtrnn_backward_acc;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Logistic function used by the MTGRU gates.
#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Gradients produced by a cell backward pass, tagged by cell kind.
#[derive(Debug, Clone)]
pub enum CellGradients {
    Mtrnn(MtrnnGradients),
    Mtgru(MtgruGradients),
}

impl CellGradients {
    /// Named weight-gradient blocks, in the cell's canonical block order.
    pub fn weight_blocks(&self) -> Vec<(&'static str, &Matrix)> {
        match self {
            CellGradients::Mtrnn(g) => vec![("w", &g.d_w)],
            CellGradients::Mtgru(g) => vec![
                ("w_xr", &g.d_w_xr),
                ("w_hr", &g.d_w_hr),
                ("w_xz", &g.d_w_xz),
                ("w_hz", &g.d_w_hz),
                ("w_xu", &g.d_w_xu),
                ("w_hu", &g.d_w_hu),
            ],
        }
    }

    pub fn weight_blocks_mut(&mut self) -> Vec<(&'static str, &mut Matrix)> {
        match self {
            CellGradients::Mtrnn(g) => vec![("w", &mut g.d_w)],
            CellGradients::Mtgru(g) => vec![
                ("w_xr", &mut g.d_w_xr),
                ("w_hr", &mut g.d_w_hr),
                ("w_xz", &mut g.d_w_xz),
                ("w_hz", &mut g.d_w_hz),
                ("w_xu", &mut g.d_w_xu),
                ("w_hu", &mut g.d_w_hu),
            ],
        }
    }

    pub fn sq_norm(&self) -> f64 {
        self.weight_blocks().iter().map(|(_, m)| m.sq_norm()).sum()
    }
}

pub(crate) fn check_tau(tau: f64, what: &str) -> Result<()> {
    // +inf is allowed: 1/tau == 0 freezes the state, a documented
    // diagnostic mode. NaN and tau < 1 are contract violations.
    if tau.is_nan() || tau < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "{what} must satisfy tau >= 1 (or +inf for a frozen state), got {tau}"
        )));
    }
    Ok(())
}
