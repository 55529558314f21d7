//! Verify the hand-derived backward passes against finite differences.
//!
//! Both cell kinds' full-sequence gradients are compared to central
//! difference quotients (L(w+ε) − L(w−ε)) / 2ε on randomly sampled weight
//! coordinates in every parameter block. The analytic backward pass is
//! exact, so the only disagreement left is the difference quotient's own
//! truncation and rounding error — relative errors sit orders of magnitude
//! below the 1e-5 gate.
//!
//! ```text
//! cargo run --example gradient_check
//! ```

use mtscale::experiment::{run_grad_check, GRAD_CHECK_TOLERANCE};
use mtscale::network::CellKind;

fn main() -> mtscale::Result<()> {
    let runs = run_grad_check(&[CellKind::Mtrnn, CellKind::Mtgru], 1e-5, 100, false)?;

    println!("kind    block     coords   max rel error   mean rel error");
    for run in &runs {
        for b in &run.report.blocks {
            println!(
                "{:<6}  {:<8}  {:<7}  {:<14.4e}  {:.4e}",
                run.kind.to_string(),
                b.name,
                b.coords_checked,
                b.max_rel_error,
                b.mean_rel_error
            );
        }
    }

    let worst = runs
        .iter()
        .map(|r| r.report.max_rel_error)
        .fold(0.0_f64, f64::max);
    println!("\nworst block: {worst:.4e} (gate: {GRAD_CHECK_TOLERANCE:.0e})");
    assert!(worst < GRAD_CHECK_TOLERANCE, "gradient check failed");
    println!("all analytic gradients match finite differences");
    Ok(())
}
