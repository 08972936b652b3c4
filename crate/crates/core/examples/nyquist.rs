//! Leftmost negative-real crossing of the open loop `z^-L (b1 + b2 z^-1)`
//! and the origin slope a map needs for the loop to start oscillating.
//!
//! cargo run --example nyquist

use rbf_ols::feedback::{default_grid_size, nyquist_q, open_loop_response, oscillation_slope_bound};

fn main() -> rbf_ols::Result<()> {
    for (b1, b2, l) in [(0.4, 0.3, 100), (0.4, 0.3, 10), (0.7, 0.0, 100), (0.1, 0.5, 3), (1.0, 0.0, 5)] {
        let q = nyquist_q(b1, b2, l, default_grid_size(l), 1e-12)?;
        println!(
            "b1 = {b1}, b2 = {b2}, L = {l:>3}: q = {q:.5}, oscillation needs S1 < {:.4}",
            oscillation_slope_bound(q)?
        );
    }
    let (re, im) = open_loop_response(0.4, 0.3, 100, std::f64::consts::PI * 2.0 / 201.0);
    println!("G near the period-201 frequency: {re:+.4} {im:+.4}j");
    Ok(())
}
