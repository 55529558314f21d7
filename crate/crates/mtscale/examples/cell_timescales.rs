//! What the time constant does, at the level of a single cell.
//!
//! Both cell kinds blend their previous state with a candidate update using
//! a per-cell rate 1/τ:
//!
//! * τ = 1 — the state is fully replaced each step. For the gated cell this
//!   reduces it exactly, bit for bit, to a standard GRU (no biases).
//! * τ large — the state moves by at most ~2/τ per step, so the cell
//!   integrates slowly and remembers.
//! * 1/τ = 0 — the state never moves: a frozen-memory diagnostic.
//!
//! ```text
//! cargo run --example cell_timescales
//! ```

use mtscale::cells::{mtgru_step, mtrnn_step, MtgruCell, MtgruState, MtrnnCell, MtrnnState};
use mtscale::numerics::{Rng, Vector};

fn demo_gru(tau: f64, label: &str) {
    let mut rng = Rng::new(8);
    let cell = MtgruCell::init_uniform(&mut rng, 4, 3, tau).unwrap();
    let mut state = MtgruState::zeros(4);
    let x = Vector::from_vec(vec![0.6, -0.2, 0.9]);
    let mut max_move = 0.0_f64;
    for _ in 0..50 {
        let (next, _) = mtgru_step(&cell, &x, &state).unwrap();
        for (a, b) in next.h.as_slice().iter().zip(state.h.as_slice()) {
            max_move = max_move.max((a - b).abs());
        }
        state = next;
    }
    println!(
        "{label:<28} max per-step |Δh| = {max_move:.6}  (bound 2/τ = {:.6})",
        2.0 / tau
    );
}

fn main() {
    println!("gated cell under different time constants:");
    demo_gru(1.0, "tau = 1 (standard GRU)");
    demo_gru(5.0, "tau = 5");
    demo_gru(50.0, "tau = 50");
    demo_gru(f64::INFINITY, "1/tau = 0 (frozen)");

    // The leaky integrator with zero weights decays geometrically:
    // u_t = (1 - 1/tau)^t u_0, exactly.
    let n = 3;
    let tau = 4.0;
    let cell = MtrnnCell::new(
        mtscale::numerics::Matrix::zeros(n, 2),
        Vector::from_vec(vec![tau; n]),
    )
    .unwrap();
    let mut state = MtrnnState {
        u: Vector::from_vec(vec![1.0, -0.5, 0.25]),
    };
    let x = Vector::from_vec(vec![0.0, 0.0]);
    println!("\nleaky integrator, zero weights, tau = {tau}: u[0] per step");
    print!("  ");
    for t in 0..=6 {
        print!("{:+.5}  ", state.u[0]);
        assert!((state.u[0] - (1.0 - 1.0 / tau).powi(t)).abs() < 1e-12);
        let (next, _) = mtrnn_step(&cell, &x, &state).unwrap();
        state = next;
    }
    println!("\n  (matches (1 - 1/tau)^t exactly)");
}
