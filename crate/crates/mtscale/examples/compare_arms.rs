//! Train both cell kinds from identical settings and compare them.
//!
//! The two arms share the network dimensions, time constants, learning
//! rate, schedule, and seed; only the recurrent cell differs. The report
//! gives each arm's final error, per-gradient-step wall time, and the
//! MTGRU/MTRNN ratios. Arms run serially here so the timing is clean.
//!
//! ```text
//! cargo run --release --example compare_arms
//! ```

use mtscale::data::gen_case1;
use mtscale::experiment::{case1_preset, run_compare, ExperimentConfig};

fn main() -> mtscale::Result<()> {
    let set = gen_case1();

    // Scaled down from presets/case1.json so the example finishes quickly.
    let cfg = ExperimentConfig {
        n_cf: 30,
        eta: 2e-4,
        max_iteration: 100,
        epochs: 8,
        seed: 11,
        ..case1_preset()
    };

    let dir = tempfile::tempdir().expect("create temp dir");
    let report = run_compare(&cfg, &set, dir.path(), true)?;

    println!("arm     final rms    ms/step   steps");
    for arm in [&report.mtrnn, &report.mtgru] {
        println!(
            "{:<6}  {:<11.6}  {:<8.3}  {}",
            arm.cell_kind, arm.final_rms, arm.mean_ms_per_step, arm.gradient_steps
        );
    }
    println!("\ntime ratio  (mtgru/mtrnn): {:.3}", report.time_ratio);
    println!("error ratio (mtgru/mtrnn): {:.3}", report.error_ratio);
    println!(
        "\neach arm directory under {} also contains plots/ with CSV exports",
        dir.path().display()
    );
    Ok(())
}
