//! Eigenvalues of the loop Jacobian `z^(L+1) - b1 d z - b2 d` and the slope
//! magnitude at which a periodic orbit stops being attracting.
//!
//! cargo run --example stability_margin

use rbf_ols::feedback::{jacobian_eigenvalues, max_root_magnitude, stability_margin};

fn main() -> rbf_ols::Result<()> {
    let (l, b1, b2) = (3, 0.1, 0.5);
    let m = stability_margin(l, b1, b2, 1e-12)?;
    println!("L = {l}, b1 = {b1}, b2 = {b2}");
    println!("  d > 0 loses stability at {:.6}", m.positive.unwrap_or(f64::NAN));
    println!("  d < 0 loses stability at {:.6}", m.negative.unwrap_or(f64::NAN));
    println!("  binding |d| = {:.6} (1/(b1+b2) = {:.6}), monotone: {}", m.d_star, 1.0 / (b1 + b2), m.monotone);
    for d in [1.0, m.d_star, 1.8, -1.8] {
        println!("  d = {d:+.4}: max |z| = {:.6}", max_root_magnitude(l, b1, b2, d)?);
    }
    for z in jacobian_eigenvalues(l, 0.5, 0.5, 1.0)? {
        println!("  z^4 - 0.5z - 0.5 root: {:+.6} {:+.6}j", z.re, z.im);
    }
    Ok(())
}
