//! Project context-layer activity onto its two principal components.
//!
//! The fast context layer (small time constant) tracks the input rhythm;
//! the slow layer (large time constant) drifts, holding longer-range
//! state. Projecting each layer's activity over a rollout onto its top two
//! principal components makes that separation visible: this example prints
//! both trajectories plus how much variance two components capture.
//!
//! ```text
//! cargo run --release --example context_pca
//! ```

use mtscale::analysis::context_pca;
use mtscale::data::gen_case1;
use mtscale::experiment::{case1_preset, run_train, ExperimentConfig};
use mtscale::network::{run_sequence, CellKind};

fn main() -> mtscale::Result<()> {
    let set = gen_case1();
    let seq = &set.sequences[1].data;

    let cfg = ExperimentConfig {
        n_cf: 30,
        eta: 2e-4,
        max_iteration: 200,
        epochs: 8,
        seed: 21,
        ..case1_preset()
    };
    let dir = tempfile::tempdir().expect("create temp dir");
    let outcome = run_train(&cfg, CellKind::Mtgru, &set, dir.path())?;

    let roll = run_sequence(&outcome.net, seq, cfg.alpha)?;
    let pca = context_pca(&roll)?;

    for (name, view) in [("fast (cf)", &pca.cf), ("slow (cs)", &pca.cs)] {
        println!(
            "{name}: first two components explain {:.1}% + {:.1}% of variance",
            100.0 * view.variance_fractions[0],
            100.0 * view.variance_fractions[1]
        );
    }

    println!("\n  t    cf pc1     cf pc2     cs pc1     cs pc2");
    for k in (0..pca.cf.projected.rows()).step_by(9) {
        let f = pca.cf.projected.row(k);
        let s = pca.cs.projected.row(k);
        println!(
            "{:>4}  {:+.4}    {:+.4}    {:+.4}    {:+.4}",
            k + 1,
            f[0],
            f[1],
            s[0],
            s[1]
        );
    }
    println!("\n(the slow trajectory moves far less per step than the fast one)");
    Ok(())
}
