//! Closed-loop generation: the network continues a trajectory on its own.
//!
//! During training the input at each step blends the real sample with the
//! network's previous prediction (weight `alpha` on the prediction). Run
//! closed loop, nothing external is fed at all — each output becomes the
//! next input. This example trains on one analytic pattern, primes the
//! network state on the first half of the real trajectory, then lets it
//! free-run the second half. Because training ran at a high blend weight
//! (alpha = 0.9, mostly self-feedback already), the learned cycle is an
//! attractor: the 49-step unaided continuation stays locked onto the real
//! trajectory, and its rms is printed over growing windows so any drift
//! would be visible.
//!
//! ```text
//! cargo run --release --example closed_loop
//! ```

use mtscale::analysis::rms_report;
use mtscale::data::gen_case1;
use mtscale::experiment::{case1_preset, run_train, ExperimentConfig};
use mtscale::network::{forward_step, load_checkpoint, run_sequence, CellKind, Network};
use mtscale::numerics::{Matrix, Vector};

/// Prime the state on rows `0..prime` of `seq`, then free-run the rest.
fn continue_sequence(net: &Network, seq: &Matrix, prime: usize) -> mtscale::Result<Matrix> {
    let mut state = net.initial_state();
    let mut out = Vector::zeros(seq.cols());
    for k in 0..prime {
        let input = Vector::from_vec(seq.row(k).to_vec());
        let (o, next, _) = forward_step(net, &input, &state)?;
        out = o;
        state = next;
    }
    // From here on the network eats its own predictions.
    let steps = seq.rows() - prime - 1;
    let mut generated = Matrix::zeros(steps, seq.cols());
    for k in 0..steps {
        generated.row_mut(k).copy_from_slice(out.as_slice());
        let (o, next, _) = forward_step(net, &out, &state)?;
        out = o;
        state = next;
    }
    Ok(generated)
}

fn main() -> mtscale::Result<()> {
    // Train on the first analytic pattern only, so the whole iteration
    // budget goes into fitting one trajectory tightly.
    let mut set = gen_case1();
    set.sequences.truncate(1);
    let seq = set.sequences[0].data.clone();

    let cfg = ExperimentConfig {
        n_cf: 40,
        eta: 2e-4,
        threshold: 0.05,
        max_iteration: 2000,
        epochs: 10,
        alpha: 0.9,
        seed: 3,
        ..case1_preset()
    };
    let dir = tempfile::tempdir().expect("create temp dir");
    println!("training mtrnn on {} ({} epochs)...", set.sequences[0].id, cfg.epochs);
    let outcome = run_train(&cfg, CellKind::Mtrnn, &set, dir.path())?;

    // Prime on the first half, generate the second half unaided.
    let prime = 50;
    let generated = continue_sequence(&outcome.net, &seq, prime)?;

    println!("\n  t    real d0      gen d0       real d1      gen d1");
    for k in (0..generated.rows()).step_by(6) {
        let real = seq.row(prime + k);
        let gen = generated.row(k);
        println!(
            "{:>4}   {:+.6}    {:+.6}    {:+.6}    {:+.6}",
            prime + k,
            real[0],
            gen[0],
            real[1],
            gen[1]
        );
    }

    // Drift compounds with the horizon: windowed rms of the free run.
    let windowed_rms = |w: usize| -> f64 {
        let mut sq = 0.0;
        for k in 0..w {
            for d in 0..generated.cols() {
                let r = generated.get(k, d) - seq.get(prime + k, d);
                sq += r * r;
            }
        }
        (sq / (w * generated.cols()) as f64).sqrt()
    };
    println!("\nfree-run rms over the first 5 steps:  {:.4}", windowed_rms(5));
    println!("free-run rms over the first 20 steps: {:.4}", windowed_rms(20));
    println!(
        "free-run rms over all {} steps:       {:.4}",
        generated.rows(),
        windowed_rms(generated.rows())
    );

    // For reference, the fully teacher-forced one-step error. (It can be
    // larger than the free-run error: the network trained at alpha = 0.9,
    // so mostly-self-fed inputs are its home regime.)
    let open = rms_report(&run_sequence(&outcome.net, &seq, 0.0)?, &seq)?;
    println!("one-step (teacher-forced) rms:        {:.4}", open.per_element_rms);

    // The weights persist: reloading the run's checkpoint reproduces the
    // free-run continuation exactly.
    let reloaded = load_checkpoint(&dir.path().join("checkpoint.bin"))?;
    let regenerated = continue_sequence(&reloaded, &seq, prime)?;
    assert_eq!(generated.data(), regenerated.data());
    println!("reloaded checkpoint regenerates the identical continuation");
    Ok(())
}
