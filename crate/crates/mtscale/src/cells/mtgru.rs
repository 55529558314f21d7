//! Gated recurrent unit with a scalar time constant on the state update.

use super::{check_tau, sigmoid, CellGradients};
use crate::error::{Error, Result};
use crate::numerics::{uniform_init, Matrix, Rng, Vector};

/// A layer of time-constant-filtered GRU units.
///
/// One step computes (no bias terms anywhere):
///
/// ```text
/// r = sigmoid(W_xr x + W_hr h)           reset gate
/// z = sigmoid(W_xz x + W_hz h)           update gate
/// u = tanh(W_xu x + W_hu (r .* h))       candidate state
/// h' = ((1 - z) .* h + z .* u) * (1/tau) + (1 - 1/tau) * h
/// ```
///
/// `tau = 1` recovers the standard GRU exactly; `tau = +inf` (`1/tau == 0`)
/// freezes the state, a diagnostic mode used by the degeneration tests. The
/// cell's output is its state `h'`.
#[derive(Debug, Clone)]
pub struct MtgruCell {
    w_xr: Matrix,
    w_hr: Matrix,
    w_xz: Matrix,
    w_hz: Matrix,
    w_xu: Matrix,
    w_hu: Matrix,
    tau: f64,
    /// Cached `1/tau` (exactly 0.0 when `tau` is infinite).
    kappa: f64,
    /// Cached `1 - 1/tau`.
    one_minus_kappa: f64,
}

/// Hidden state of an [`MtgruCell`].
#[derive(Debug, Clone, PartialEq)]
pub struct MtgruState {
    pub h: Vector,
}

impl MtgruState {
    pub fn zeros(n_units: usize) -> Self {
        MtgruState {
            h: Vector::zeros(n_units),
        }
    }
}

/// Per-step gate activations recorded by the forward pass; the backward pass
/// needs exactly these (plus `x` and the previous state) to be exact.
#[derive(Debug, Clone)]
pub struct MtgruGateTrace {
    pub r: Vector,
    pub z: Vector,
    pub u_cand: Vector,
}

/// Gradients of one MTGRU step.
#[derive(Debug, Clone)]
pub struct MtgruGradients {
    pub d_w_xr: Matrix,
    pub d_w_hr: Matrix,
    pub d_w_xz: Matrix,
    pub d_w_hz: Matrix,
    pub d_w_xu: Matrix,
    pub d_w_hu: Matrix,
    /// d loss / d input x.
    pub d_x: Vector,
    /// d loss / d previous state h.
    pub d_state: Vector,
}

impl MtgruCell {
    /// Build from explicit gate weights. All six matrices must agree on the
    /// unit count; the `W_x*` blocks on the input width; the `W_h*` blocks
    /// must be square of the unit count.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        w_xr: Matrix,
        w_hr: Matrix,
        w_xz: Matrix,
        w_hz: Matrix,
        w_xu: Matrix,
        w_hu: Matrix,
        tau: f64,
    ) -> Result<Self> {
        check_tau(tau, "MtgruCell tau")?;
        let n_units = w_xr.rows();
        let n_inputs = w_xr.cols();
        let expect = |name: &str, m: &Matrix, rows: usize, cols: usize| -> Result<()> {
            if m.rows() != rows || m.cols() != cols {
                return Err(Error::ShapeMismatch {
                    op: "MtgruCell::new",
                    left: format!("{name} expected {rows}x{cols}"),
                    right: format!("got {}x{}", m.rows(), m.cols()),
                });
            }
            Ok(())
        };
        expect("W_hr", &w_hr, n_units, n_units)?;
        expect("W_xz", &w_xz, n_units, n_inputs)?;
        expect("W_hz", &w_hz, n_units, n_units)?;
        expect("W_xu", &w_xu, n_units, n_inputs)?;
        expect("W_hu", &w_hu, n_units, n_units)?;
        let kappa = 1.0 / tau;
        Ok(MtgruCell {
            w_xr,
            w_hr,
            w_xz,
            w_hz,
            w_xu,
            w_hu,
            tau,
            kappa,
            one_minus_kappa: 1.0 - kappa,
        })
    }

    /// Random cell: input blocks uniform in `+-1/sqrt(n_inputs)`, recurrent
    /// blocks uniform in `+-1/sqrt(n_units)`. Draw order is the declaration
    /// order `W_xr, W_hr, W_xz, W_hz, W_xu, W_hu`.
    pub fn init_uniform(rng: &mut Rng, n_units: usize, n_inputs: usize, tau: f64) -> Result<Self> {
        let hx = 1.0 / (n_inputs as f64).sqrt();
        let hh = 1.0 / (n_units as f64).sqrt();
        let w_xr = uniform_init(rng, n_units, n_inputs, hx)?;
        let w_hr = uniform_init(rng, n_units, n_units, hh)?;
        let w_xz = uniform_init(rng, n_units, n_inputs, hx)?;
        let w_hz = uniform_init(rng, n_units, n_units, hh)?;
        let w_xu = uniform_init(rng, n_units, n_inputs, hx)?;
        let w_hu = uniform_init(rng, n_units, n_units, hh)?;
        MtgruCell::new(w_xr, w_hr, w_xz, w_hz, w_xu, w_hu, tau)
    }

    pub fn n_units(&self) -> usize {
        self.w_xr.rows()
    }

    pub fn n_inputs(&self) -> usize {
        self.w_xr.cols()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Named weight blocks in canonical order.
    pub fn weight_blocks(&self) -> Vec<(&'static str, &Matrix)> {
        vec![
            ("w_xr", &self.w_xr),
            ("w_hr", &self.w_hr),
            ("w_xz", &self.w_xz),
            ("w_hz", &self.w_hz),
            ("w_xu", &self.w_xu),
            ("w_hu", &self.w_hu),
        ]
    }

    pub fn weight_blocks_mut(&mut self) -> Vec<(&'static str, &mut Matrix)> {
        vec![
            ("w_xr", &mut self.w_xr),
            ("w_hr", &mut self.w_hr),
            ("w_xz", &mut self.w_xz),
            ("w_hz", &mut self.w_hz),
            ("w_xu", &mut self.w_xu),
            ("w_hu", &mut self.w_hu),
        ]
    }

    pub fn zero_gradients(&self) -> MtgruGradients {
        let n = self.n_units();
        let m = self.n_inputs();
        MtgruGradients {
            d_w_xr: Matrix::zeros(n, m),
            d_w_hr: Matrix::zeros(n, n),
            d_w_xz: Matrix::zeros(n, m),
            d_w_hz: Matrix::zeros(n, n),
            d_w_xu: Matrix::zeros(n, m),
            d_w_hu: Matrix::zeros(n, n),
            d_x: Vector::zeros(m),
            d_state: Vector::zeros(n),
        }
    }

    fn check_shapes(&self, x: &Vector, state: &MtgruState, op: &'static str) -> Result<()> {
        if x.len() != self.n_inputs() {
            return Err(Error::ShapeMismatch {
                op,
                left: format!("cell with {} inputs", self.n_inputs()),
                right: format!("input vector of length {}", x.len()),
            });
        }
        if state.h.len() != self.n_units() {
            return Err(Error::ShapeMismatch {
                op,
                left: format!("cell with {} units", self.n_units()),
                right: format!("state vector of length {}", state.h.len()),
            });
        }
        Ok(())
    }
}

/// One forward step. The new state is also the cell output; the gate trace
/// carries what the backward pass needs.
pub fn mtgru_step(
    cell: &MtgruCell,
    x: &Vector,
    state: &MtgruState,
) -> Result<(MtgruState, MtgruGateTrace)> {
    cell.check_shapes(x, state, "mtgru_step")?;
    let n = cell.n_units();
    let hp = state.h.as_slice();

    let mut r = Vector::zeros(n);
    let mut tmp = vec![0.0; n];
    cell.w_xr.matvec_into(x.as_slice(), r.as_mut_slice());
    cell.w_hr.matvec_into(hp, &mut tmp);
    for i in 0..n {
        r[i] = sigmoid(r[i] + tmp[i]);
    }

    let mut z = Vector::zeros(n);
    cell.w_xz.matvec_into(x.as_slice(), z.as_mut_slice());
    cell.w_hz.matvec_into(hp, &mut tmp);
    for i in 0..n {
        z[i] = sigmoid(z[i] + tmp[i]);
    }

    let rh: Vec<f64> = (0..n).map(|i| r[i] * hp[i]).collect();
    let mut u = Vector::zeros(n);
    cell.w_xu.matvec_into(x.as_slice(), u.as_mut_slice());
    cell.w_hu.matvec_into(&rh, &mut tmp);
    for i in 0..n {
        u[i] = (u[i] + tmp[i]).tanh();
    }

    let mut h = Vector::zeros(n);
    for i in 0..n {
        let mix = (1.0 - z[i]) * hp[i] + z[i] * u[i];
        h[i] = mix * cell.kappa + cell.one_minus_kappa * hp[i];
    }
    Ok((
        MtgruState { h },
        MtgruGateTrace { r, z, u_cand: u },
    ))
}

/// Exact backward pass for one step, given the forward step's gate trace and
/// the loss gradient `upstream_grad_h` arriving at the new state `h'`.
pub fn mtgru_backward(
    cell: &MtgruCell,
    x: &Vector,
    state_before: &MtgruState,
    gate_trace: &MtgruGateTrace,
    upstream_grad_h: &Vector,
) -> Result<CellGradients> {
    cell.check_shapes(x, state_before, "mtgru_backward")?;
    let n = cell.n_units();
    if gate_trace.r.len() != n || gate_trace.z.len() != n || gate_trace.u_cand.len() != n {
        return Err(Error::ShapeMismatch {
            op: "mtgru_backward",
            left: format!("cell with {n} units"),
            right: format!(
                "gate trace of lengths {}/{}/{}",
                gate_trace.r.len(),
                gate_trace.z.len(),
                gate_trace.u_cand.len()
            ),
        });
    }
    if upstream_grad_h.len() != n {
        return Err(Error::ShapeMismatch {
            op: "mtgru_backward",
            left: format!("cell with {n} units"),
            right: format!("upstream gradient of length {}", upstream_grad_h.len()),
        });
    }
    let mut grads = cell.zero_gradients();
    mtgru_backward_acc(
        cell,
        x.as_slice(),
        state_before.h.as_slice(),
        gate_trace,
        upstream_grad_h.as_slice(),
        &mut grads,
    );
    Ok(CellGradients::Mtgru(grads))
}

/// Backward-pass core shared by [`mtgru_backward`] and full-sequence BPTT.
///
/// Weight gradients accumulate into `grads`; `grads.d_x` and `grads.d_state`
/// are overwritten.
pub(crate) fn mtgru_backward_acc(
    cell: &MtgruCell,
    x: &[f64],
    hp: &[f64],
    trace: &MtgruGateTrace,
    g_h: &[f64],
    grads: &mut MtgruGradients,
) {
    let n = cell.n_units();
    let kappa = cell.kappa;
    let (r, z, u) = (&trace.r, &trace.z, &trace.u_cand);

    // Gate pre-activation gradients.
    let mut da_z = vec![0.0; n];
    let mut da_u = vec![0.0; n];
    for i in 0..n {
        let g_mix = kappa * g_h[i];
        da_z[i] = g_mix * (u[i] - hp[i]) * z[i] * (1.0 - z[i]);
        da_u[i] = g_mix * z[i] * (1.0 - u[i] * u[i]);
    }

    // q = d loss / d (r .* h_prev), through the candidate's recurrent block.
    let mut q = vec![0.0; n];
    cell.w_hu.matvec_t_acc(&da_u, &mut q);
    let mut da_r = vec![0.0; n];
    for i in 0..n {
        da_r[i] = q[i] * hp[i] * r[i] * (1.0 - r[i]);
    }

    // Previous-state gradient: leak path, mix path, candidate path, gates.
    let ds = grads.d_state.as_mut_slice();
    for i in 0..n {
        ds[i] = cell.one_minus_kappa * g_h[i] + kappa * g_h[i] * (1.0 - z[i]) + q[i] * r[i];
    }
    cell.w_hr.matvec_t_acc(&da_r, ds);
    cell.w_hz.matvec_t_acc(&da_z, ds);

    // Input gradient.
    let dx = grads.d_x.as_mut_slice();
    dx.fill(0.0);
    cell.w_xr.matvec_t_acc(&da_r, dx);
    cell.w_xz.matvec_t_acc(&da_z, dx);
    cell.w_xu.matvec_t_acc(&da_u, dx);

    // Weight gradients.
    let rh: Vec<f64> = (0..n).map(|i| r[i] * hp[i]).collect();
    grads.d_w_xr.add_outer(&da_r, x);
    grads.d_w_hr.add_outer(&da_r, hp);
    grads.d_w_xz.add_outer(&da_z, x);
    grads.d_w_hz.add_outer(&da_z, hp);
    grads.d_w_xu.add_outer(&da_u, x);
    grads.d_w_hu.add_outer(&da_u, &rh);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::relative_error;

    fn zero_cell(n_units: usize, n_inputs: usize, tau: f64) -> MtgruCell {
        MtgruCell::new(
            Matrix::zeros(n_units, n_inputs),
            Matrix::zeros(n_units, n_units),
            Matrix::zeros(n_units, n_inputs),
            Matrix::zeros(n_units, n_units),
            Matrix::zeros(n_units, n_inputs),
            Matrix::zeros(n_units, n_units),
            tau,
        )
        .unwrap()
    }

    fn fixed_cell(tau: f64) -> MtgruCell {
        MtgruCell::new(
            Matrix::from_rows(&[vec![0.1, -0.3], vec![0.2, 0.0]]).unwrap(),
            Matrix::from_rows(&[vec![0.05, 0.1], vec![-0.2, 0.15]]).unwrap(),
            Matrix::from_rows(&[vec![-0.1, 0.25], vec![0.3, -0.2]]).unwrap(),
            Matrix::from_rows(&[vec![0.12, -0.05], vec![0.08, 0.2]]).unwrap(),
            Matrix::from_rows(&[vec![0.4, -0.15], vec![-0.25, 0.35]]).unwrap(),
            Matrix::from_rows(&[vec![-0.1, 0.3], vec![0.22, -0.12]]).unwrap(),
            tau,
        )
        .unwrap()
    }

    /// All-zero weights, h = 0.5, tau = 20: gates sit at 1/2, the candidate
    /// at 0, so h' = 0.25/20 + 0.95 * 0.5 = 0.4875.
    #[test]
    fn zero_weight_hand_step() {
        let cell = zero_cell(1, 1, 20.0);
        let state = MtgruState {
            h: Vector::from_vec(vec![0.5]),
        };
        let (next, trace) = mtgru_step(&cell, &Vector::zeros(1), &state).unwrap();
        assert_eq!(trace.r[0], 0.5);
        assert_eq!(trace.z[0], 0.5);
        assert_eq!(trace.u_cand[0], 0.0);
        assert!((next.h[0] - 0.4875).abs() < 1e-15);
    }

    /// Nontrivial step frozen from an independent evaluation of the gate
    /// equations.
    #[test]
    fn fixed_weight_step_matches_independent_evaluation() {
        let cell = fixed_cell(2.0);
        let state = MtgruState {
            h: Vector::from_vec(vec![0.3, -0.4]),
        };
        let x = Vector::from_vec(vec![0.8, -0.5]);
        let (next, trace) = mtgru_step(&cell, &x, &state).unwrap();
        let expect = |got: f64, want: f64| assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        expect(trace.r[0], 0.551071269307342);
        expect(trace.r[1], 0.5099986668799655);
        expect(trace.z[0], 0.4628187629475805);
        expect(trace.z[1], 0.5705266031962988);
        expect(trace.u_cand[0], 0.307034567290259);
        expect(trace.u_cand[1], -0.3042072044123467);
        expect(next.h[0], 0.3016278648655746);
        expect(next.h[1], -0.3726738308613494);
    }

    /// A reference standard GRU, written straight from the textbook
    /// equations, for the tau = 1 degeneration checks.
    struct ReferenceGru<'a> {
        cell: &'a MtgruCell,
    }

    impl ReferenceGru<'_> {
        fn step(&self, x: &Vector, hp: &Vector) -> (Vector, Vector, Vector, Vector) {
            let n = self.cell.n_units();
            let wb: std::collections::HashMap<&str, &Matrix> =
                self.cell.weight_blocks().into_iter().collect();
            let av = |m: &Matrix, v: &Vector| m.matvec(v).unwrap();
            let mut r = Vector::zeros(n);
            let mut z = Vector::zeros(n);
            let mut u = Vector::zeros(n);
            let mut h = Vector::zeros(n);
            let xr = av(wb["w_xr"], x);
            let hr = av(wb["w_hr"], hp);
            let xz = av(wb["w_xz"], x);
            let hz = av(wb["w_hz"], hp);
            for i in 0..n {
                r[i] = sigmoid(xr[i] + hr[i]);
                z[i] = sigmoid(xz[i] + hz[i]);
            }
            let rh = Vector::from_vec((0..n).map(|i| r[i] * hp[i]).collect());
            let xu = av(wb["w_xu"], x);
            let hu = av(wb["w_hu"], &rh);
            for i in 0..n {
                u[i] = (xu[i] + hu[i]).tanh();
                h[i] = (1.0 - z[i]) * hp[i] + z[i] * u[i];
            }
            (h, r, z, u)
        }
    }

    /// tau = 1 must reproduce the plain GRU exactly (bit-for-bit).
    #[test]
    fn tau_one_equals_reference_gru() {
        let mut rng = Rng::new(31);
        let cell = MtgruCell::init_uniform(&mut rng, 5, 3, 1.0).unwrap();
        let x = Vector::from_vec((0..3).map(|_| rng.uniform(0.9)).collect());
        let state = MtgruState {
            h: Vector::from_vec((0..5).map(|_| rng.uniform(0.9)).collect()),
        };
        let (next, trace) = mtgru_step(&cell, &x, &state).unwrap();
        let (h_ref, r_ref, z_ref, u_ref) = ReferenceGru { cell: &cell }.step(&x, &state.h);
        assert_eq!(next.h.as_slice(), h_ref.as_slice());
        assert_eq!(trace.r.as_slice(), r_ref.as_slice());
        assert_eq!(trace.z.as_slice(), z_ref.as_slice());
        assert_eq!(trace.u_cand.as_slice(), u_ref.as_slice());
    }

    /// 1/tau == 0 freezes the state exactly, whatever the weights and input.
    #[test]
    fn infinite_tau_freezes_state_bitwise() {
        let mut rng = Rng::new(77);
        let cell = MtgruCell::init_uniform(&mut rng, 6, 4, f64::INFINITY).unwrap();
        let x = Vector::from_vec((0..4).map(|_| rng.uniform(1.0)).collect());
        let h0: Vec<f64> = (0..6).map(|_| rng.uniform(1.0)).collect();
        let mut state = MtgruState {
            h: Vector::from_vec(h0.clone()),
        };
        for _ in 0..7 {
            state = mtgru_step(&cell, &x, &state).unwrap().0;
        }
        assert_eq!(state.h.as_slice(), h0.as_slice());
    }

    /// Gates stay strictly inside (0,1) and the state inside [-1,1] for
    /// bounded weights and initial state.
    #[test]
    fn gates_and_state_stay_bounded() {
        for seed in 1..40u64 {
            let mut rng = Rng::new(seed);
            let tau = 1.0 + rng.next_f64() * 9.0;
            let cell = MtgruCell::init_uniform(&mut rng, 4, 3, tau).unwrap();
            let mut state = MtgruState {
                h: Vector::from_vec((0..4).map(|_| rng.uniform(1.0)).collect()),
            };
            for _ in 0..50 {
                let x = Vector::from_vec((0..3).map(|_| rng.uniform(1.0)).collect());
                let (next, trace) = mtgru_step(&cell, &x, &state).unwrap();
                for i in 0..4 {
                    assert!(trace.r[i] > 0.0 && trace.r[i] < 1.0);
                    assert!(trace.z[i] > 0.0 && trace.z[i] < 1.0);
                    assert!(next.h[i].abs() <= 1.0, "state escaped [-1,1]");
                }
                state = next;
            }
        }
    }

    /// Central-difference oracle over every coordinate of every block, with
    /// the scalar probe L = c . h'.
    #[test]
    fn backward_matches_central_differences() {
        let mut rng = Rng::new(909);
        let cell = MtgruCell::init_uniform(&mut rng, 3, 2, 2.5).unwrap();
        let x = Vector::from_vec((0..2).map(|_| rng.uniform(0.9)).collect());
        let state = MtgruState {
            h: Vector::from_vec((0..3).map(|_| rng.uniform(0.9)).collect()),
        };
        let c = Vector::from_vec((0..3).map(|_| rng.uniform(1.0)).collect());
        let eps = 1e-5;

        let probe = |cell: &MtgruCell, x: &Vector, state: &MtgruState| -> f64 {
            let (next, _) = mtgru_step(cell, x, state).unwrap();
            (0..3).map(|i| c[i] * next.h[i]).sum()
        };

        let (_, trace) = mtgru_step(&cell, &x, &state).unwrap();
        let CellGradients::Mtgru(g) = mtgru_backward(&cell, &x, &state, &trace, &c).unwrap() else {
            panic!("wrong gradient kind")
        };

        fn grad_block<'a>(g: &'a MtgruGradients, name: &str) -> &'a Matrix {
            match name {
                "w_xr" => &g.d_w_xr,
                "w_hr" => &g.d_w_hr,
                "w_xz" => &g.d_w_xz,
                "w_hz" => &g.d_w_hz,
                "w_xu" => &g.d_w_xu,
                "w_hu" => &g.d_w_hu,
                other => panic!("no block named {other}"),
            }
        }

        let mut worst = 0.0f64;
        for name in ["w_xr", "w_hr", "w_xz", "w_hz", "w_xu", "w_hu"] {
            let analytic = grad_block(&g, name).clone();
            for i in 0..analytic.rows() {
                for j in 0..analytic.cols() {
                    let perturbed = |delta: f64| -> f64 {
                        let mut c2 = cell.clone();
                        for (n, m) in c2.weight_blocks_mut() {
                            if n == name {
                                let v = m.get(i, j);
                                m.set(i, j, v + delta);
                            }
                        }
                        probe(&c2, &x, &state)
                    };
                    let fd = (perturbed(eps) - perturbed(-eps)) / (2.0 * eps);
                    worst = worst.max(relative_error(analytic.get(i, j), fd));
                }
            }
        }
        for j in 0..2 {
            let mut xp = x.clone();
            xp[j] += eps;
            let mut xm = x.clone();
            xm[j] -= eps;
            let fd = (probe(&cell, &xp, &state) - probe(&cell, &xm, &state)) / (2.0 * eps);
            worst = worst.max(relative_error(g.d_x[j], fd));
        }
        for i in 0..3 {
            let mut sp = state.clone();
            sp.h[i] += eps;
            let mut sm = state.clone();
            sm.h[i] -= eps;
            let fd = (probe(&cell, &x, &sp) - probe(&cell, &x, &sm)) / (2.0 * eps);
            worst = worst.max(relative_error(g.d_state[i], fd));
        }
        assert!(worst < 1e-6, "max relative error {worst}");
    }

    /// tau = 1 backward must agree exactly with a reference GRU backward
    /// sharing the same weights and trace.
    #[test]
    fn tau_one_backward_equals_reference_gru_backward() {
        let mut rng = Rng::new(512);
        let cell = MtgruCell::init_uniform(&mut rng, 4, 3, 1.0).unwrap();
        let x = Vector::from_vec((0..3).map(|_| rng.uniform(0.9)).collect());
        let state = MtgruState {
            h: Vector::from_vec((0..4).map(|_| rng.uniform(0.9)).collect()),
        };
        let g_h = Vector::from_vec((0..4).map(|_| rng.uniform(1.0) + 0.1).collect());
        let (_, trace) = mtgru_step(&cell, &x, &state).unwrap();
        let CellGradients::Mtgru(mine) =
            mtgru_backward(&cell, &x, &state, &trace, &g_h).unwrap()
        else {
            panic!("wrong gradient kind")
        };

        // Reference backward for h' = (1-z) h + z u, same accumulation order.
        let n = 4;
        let wb: std::collections::HashMap<&str, &Matrix> =
            cell.weight_blocks().into_iter().collect();
        let hp = state.h.as_slice();
        let (r, z, u) = (&trace.r, &trace.z, &trace.u_cand);
        let mut da_z = vec![0.0; n];
        let mut da_u = vec![0.0; n];
        for i in 0..n {
            da_z[i] = g_h[i] * (u[i] - hp[i]) * z[i] * (1.0 - z[i]);
            da_u[i] = g_h[i] * z[i] * (1.0 - u[i] * u[i]);
        }
        let mut q = vec![0.0; n];
        wb["w_hu"].matvec_t_acc(&da_u, &mut q);
        let mut da_r = vec![0.0; n];
        for i in 0..n {
            da_r[i] = q[i] * hp[i] * r[i] * (1.0 - r[i]);
        }
        let mut d_state = vec![0.0; n];
        for i in 0..n {
            d_state[i] = g_h[i] * (1.0 - z[i]) + q[i] * r[i];
        }
        wb["w_hr"].matvec_t_acc(&da_r, &mut d_state);
        wb["w_hz"].matvec_t_acc(&da_z, &mut d_state);

        for i in 0..n {
            assert_eq!(mine.d_state[i], d_state[i], "d_state[{i}]");
        }
        // Spot-check a weight block: dW_xz = da_z outer x.
        for i in 0..n {
            for j in 0..3 {
                assert_eq!(mine.d_w_xz.get(i, j), da_z[i] * x[j]);
            }
        }
    }

    #[test]
    fn contract_violations_are_reported() {
        let cell = zero_cell(2, 3, 2.0);
        let state = MtgruState::zeros(2);
        assert!(mtgru_step(&cell, &Vector::zeros(2), &state).is_err());
        assert!(mtgru_step(&cell, &Vector::zeros(3), &MtgruState::zeros(3)).is_err());
        assert!(MtgruCell::new(
            Matrix::zeros(2, 3),
            Matrix::zeros(2, 2),
            Matrix::zeros(2, 3),
            Matrix::zeros(2, 2),
            Matrix::zeros(2, 3),
            Matrix::zeros(3, 2), // wrong shape
            2.0,
        )
        .is_err());
        assert!(MtgruCell::init_uniform(&mut Rng::new(1), 2, 2, 0.99).is_err());
    }
}
