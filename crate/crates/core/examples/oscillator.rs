//! A cubic map with fixed points at the origin and `(∓100, ±100)` closes a
//! 100-sample delay line through `H(z) = 0.4 + 0.3 z^-1`. The origin slope
//! decides whether a small random start dies out or grows into a period-200
//! oscillation.
//!
//! cargo run --release --example oscillator

use rbf_ols::demos::{oscillator_run, OSCILLATOR_SLOPES};
use rbf_ols::feedback::{default_grid_size, nyquist_q, oscillation_slope_bound};

fn main() -> rbf_ols::Result<()> {
    let q = nyquist_q(0.4, 0.3, 100, default_grid_size(100), 1e-12)?;
    println!("startup needs S1 < {:.4}", oscillation_slope_bound(q)?);
    for s1 in OSCILLATOR_SLOPES {
        let run = oscillator_run(s1, 0)?;
        println!(
            "S1 = {s1:+.2}: peak {:.3e} in the first 1000 samples, {:.3e} in the last 1000, period {:?}",
            run.early_peak, run.late_peak, run.period
        );
    }
    Ok(())
}
