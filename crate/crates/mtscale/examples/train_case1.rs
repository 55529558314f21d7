//! Train the leaky-integrator network on the two analytic patterns.
//!
//! This is a scaled-down run (fewer fast units, a lower iteration cap) so it
//! finishes in seconds; `presets/case1.json` holds the full-scale settings.
//! Each sequence is trained with per-sequence early stopping: gradient
//! descent repeats on one sequence until its loss drops below `threshold`
//! or `max_iteration` steps have been spent, then moves on.
//!
//! ```text
//! cargo run --release --example train_case1
//! ```

use mtscale::data::gen_case1;
use mtscale::experiment::{case1_preset, run_train, ExperimentConfig};
use mtscale::network::CellKind;

fn main() -> mtscale::Result<()> {
    let set = gen_case1();

    let cfg = ExperimentConfig {
        n_cf: 30,
        eta: 2e-4,
        max_iteration: 200,
        epochs: 30,
        seed: 11,
        ..case1_preset()
    };

    let dir = tempfile::tempdir().expect("create temp dir");
    let outcome = run_train(&cfg, CellKind::Mtrnn, &set, dir.path())?;

    println!("epoch   mean error");
    for (e, err) in outcome.log.epoch_mean_error.iter().enumerate() {
        if e % 3 == 0 || e + 1 == outcome.log.epoch_mean_error.len() {
            println!("{:>5}   {err:.6}", e + 1);
        }
    }
    println!(
        "\n{} gradient steps, {:.3} ms/step, final per-element rms {:.4}",
        outcome.report.gradient_steps,
        outcome.report.mean_ms_per_step,
        outcome.report.final_rms
    );
    println!(
        "artifacts written to {} (config.json, log.csv, curve.csv, checkpoint.bin, report.json)",
        dir.path().display()
    );
    Ok(())
}
