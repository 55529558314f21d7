//! Leaky-integrator neuron layer with per-neuron time constants.

use super::{check_tau, CellGradients};
use crate::error::{Error, Result};
use crate::numerics::{uniform_init, Matrix, Rng, Vector};

/// A layer of leaky-integrator neurons.
///
/// Each neuron `i` carries a membrane potential `u_i` updated as
///
/// ```text
/// u_i' = (1 - 1/tau_i) * u_i + (1/tau_i) * sum_j W[i][j] * x_j
/// y_i  = tanh(u_i')
/// ```
///
/// Large `tau` makes the potential change slowly (a slow neuron); `tau = 1`
/// degenerates to the memoryless product `u' = W x`.
#[derive(Debug, Clone)]
pub struct MtrnnCell {
    w: Matrix,
    tau: Vector,
    /// Cached `1 / tau_i`.
    inv_tau: Vector,
    /// Cached `1 - 1 / tau_i`.
    decay: Vector,
}

/// Membrane potentials of an [`MtrnnCell`] layer.
#[derive(Debug, Clone, PartialEq)]
pub struct MtrnnState {
    pub u: Vector,
}

impl MtrnnState {
    pub fn zeros(n_units: usize) -> Self {
        MtrnnState {
            u: Vector::zeros(n_units),
        }
    }
}

/// Gradients of one MTRNN step.
#[derive(Debug, Clone)]
pub struct MtrnnGradients {
    /// d loss / d W.
    pub d_w: Matrix,
    /// d loss / d input x.
    pub d_x: Vector,
    /// d loss / d previous potential u.
    pub d_state: Vector,
}

impl MtrnnCell {
    /// Build from explicit weights and per-neuron time constants.
    pub fn new(w: Matrix, tau: Vector) -> Result<Self> {
        if tau.len() != w.rows() {
            return Err(Error::ShapeMismatch {
                op: "MtrnnCell::new",
                left: format!("weight matrix with {} rows", w.rows()),
                right: format!("tau vector of length {}", tau.len()),
            });
        }
        let mut inv_tau = Vector::zeros(tau.len());
        let mut decay = Vector::zeros(tau.len());
        for i in 0..tau.len() {
            check_tau(tau[i], "MtrnnCell tau")?;
            inv_tau[i] = 1.0 / tau[i];
            decay[i] = 1.0 - inv_tau[i];
        }
        Ok(MtrnnCell {
            w,
            tau,
            inv_tau,
            decay,
        })
    }

    /// Random cell: weights uniform in `[-1/sqrt(n_inputs), +1/sqrt(n_inputs))`,
    /// every neuron sharing the time constant `tau`.
    pub fn init_uniform(rng: &mut Rng, n_units: usize, n_inputs: usize, tau: f64) -> Result<Self> {
        let half = 1.0 / (n_inputs as f64).sqrt();
        let w = uniform_init(rng, n_units, n_inputs, half)?;
        MtrnnCell::new(w, Vector::from_vec(vec![tau; n_units]))
    }

    pub fn n_units(&self) -> usize {
        self.w.rows()
    }

    pub fn n_inputs(&self) -> usize {
        self.w.cols()
    }

    pub fn w(&self) -> &Matrix {
        &self.w
    }

    pub fn w_mut(&mut self) -> &mut Matrix {
        &mut self.w
    }

    pub fn tau(&self) -> &Vector {
        &self.tau
    }

    pub fn zero_gradients(&self) -> MtrnnGradients {
        MtrnnGradients {
            d_w: Matrix::zeros(self.w.rows(), self.w.cols()),
            d_x: Vector::zeros(self.n_inputs()),
            d_state: Vector::zeros(self.n_units()),
        }
    }

    fn check_shapes(&self, x: &Vector, state: &MtrnnState, op: &'static str) -> Result<()> {
        if x.len() != self.n_inputs() {
            return Err(Error::ShapeMismatch {
                op,
                left: format!("cell with {} inputs", self.n_inputs()),
                right: format!("input vector of length {}", x.len()),
            });
        }
        if state.u.len() != self.n_units() {
            return Err(Error::ShapeMismatch {
                op,
                left: format!("cell with {} units", self.n_units()),
                right: format!("state vector of length {}", state.u.len()),
            });
        }
        Ok(())
    }
}

/// One forward step. Returns the new state and the output `y = tanh(u')`.
pub fn mtrnn_step(cell: &MtrnnCell, x: &Vector, state: &MtrnnState) -> Result<(MtrnnState, Vector)> {
    cell.check_shapes(x, state, "mtrnn_step")?;
    let n = cell.n_units();
    let mut u_next = Vector::zeros(n);
    cell.w.matvec_into(x.as_slice(), u_next.as_mut_slice());
    let mut y = Vector::zeros(n);
    for i in 0..n {
        let un = cell.decay[i] * state.u[i] + cell.inv_tau[i] * u_next[i];
        u_next[i] = un;
        y[i] = un.tanh();
    }
    Ok((MtrnnState { u: u_next }, y))
}

/// Exact backward pass for one step.
///
/// `upstream_grad_u_next` is the loss gradient arriving directly at the new
/// potential `u'` (the recurrence path); `upstream_grad_y` arrives at the
/// output `y` (the readout path). The step is recomputed internally from
/// `(x, state_before)`.
pub fn mtrnn_backward(
    cell: &MtrnnCell,
    x: &Vector,
    state_before: &MtrnnState,
    upstream_grad_u_next: &Vector,
    upstream_grad_y: &Vector,
) -> Result<CellGradients> {
    cell.check_shapes(x, state_before, "mtrnn_backward")?;
    let n = cell.n_units();
    if upstream_grad_u_next.len() != n || upstream_grad_y.len() != n {
        return Err(Error::ShapeMismatch {
            op: "mtrnn_backward",
            left: format!("cell with {n} units"),
            right: format!(
                "upstream gradients of lengths {} and {}",
                upstream_grad_u_next.len(),
                upstream_grad_y.len()
            ),
        });
    }
    // Recompute u' for the tanh derivative.
    let mut u_next = Vector::zeros(n);
    cell.w.matvec_into(x.as_slice(), u_next.as_mut_slice());
    for i in 0..n {
        u_next[i] = cell.decay[i] * state_before.u[i] + cell.inv_tau[i] * u_next[i];
    }
    let mut grads = cell.zero_gradients();
    mtrnn_backward_acc(
        cell,
        x.as_slice(),
        u_next.as_slice(),
        upstream_grad_u_next.as_slice(),
        upstream_grad_y.as_slice(),
        &mut grads,
    );
    Ok(CellGradients::Mtrnn(grads))
}

/// Backward-pass core shared by [`mtrnn_backward`] and full-sequence BPTT.
///
/// Weight gradients are accumulated into `grads.d_w`; `grads.d_x` and
/// `grads.d_state` are overwritten. `u_next` is the already-computed new
/// potential of the forward step (so rollouts need not recompute it).
pub(crate) fn mtrnn_backward_acc(
    cell: &MtrnnCell,
    x: &[f64],
    u_next: &[f64],
    g_u_next: &[f64],
    g_y: &[f64],
    grads: &mut MtrnnGradients,
) {
    let n = cell.n_units();
    // a = dL/du' combining the direct path and the tanh'd output path.
    let mut a_kappa = vec![0.0; n];
    for i in 0..n {
        let y = u_next[i].tanh();
        let a = g_u_next[i] + g_y[i] * (1.0 - y * y);
        grads.d_state[i] = a * cell.decay[i];
        a_kappa[i] = a * cell.inv_tau[i];
    }
    grads.d_x.fill(0.0);
    cell.w.matvec_t_acc(&a_kappa, grads.d_x.as_mut_slice());
    grads.d_w.add_outer(&a_kappa, x);
}
