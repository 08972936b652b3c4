//! Jitters the loop filter coefficients for five samples while the loop sits
//! on a learned 6-sample orbit. Whether the orbit comes back depends on how
//! the map's slope compares with the Jacobian stability margin. Close below
//! the margin the linear pull is weak, and the jitter can carry the state
//! out of the map's basin before it acts.
//!
//! cargo run --example coefficient_perturbation

use rbf_ols::demos::{peak, perturb_run, PERTURB_DELAY, PERTURB_FILTER};
use rbf_ols::feedback::{max_root_magnitude, stability_margin};

fn main() -> rbf_ols::Result<()> {
    let (b1, b2) = PERTURB_FILTER;
    let margin = stability_margin(PERTURB_DELAY, b1, b2, 1e-10)?;
    println!("margin |d| = {:.4}", margin.d_star);
    for d in [0.5, 1.0, 1.4, margin.d_star, 1.8] {
        let run = perturb_run(d, 0)?;
        let r = run.recovery.expect("perturbation run measures recovery");
        let tail = peak(&run.distance[run.distance.len() - 50..]);
        println!(
            "d = {d:.4} (max |z| {:.4}): recovered at {:?}, distance over the last 50 samples {tail:.2e}",
            max_root_magnitude(PERTURB_DELAY, b1, b2, d)?,
            r.recovered_at
        );
    }
    Ok(())
}
