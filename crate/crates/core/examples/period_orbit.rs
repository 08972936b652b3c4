//! Learns a map that turns a desired 8-sample waveform into an attracting
//! orbit of a 4-sample delay loop, then checks it survives a 46 dB noise burst.
//!
//! cargo run --example period_orbit

use rbf_ols::demos::{peak, period8_map, period8_run, PERIOD8};

fn main() -> rbf_ols::Result<()> {
    let (data, net, report) = period8_map()?;
    println!("period {:?}", PERIOD8);
    println!(
        "{} training pairs, {} units, rms {:.2e}",
        data.len(),
        net.units(),
        report.final_rms().unwrap_or(f64::NAN)
    );
    for (x, t) in data.x().iter().zip(&data.targets()[0]) {
        println!("  f({x:+.2}) = {:+.6} (want {t:+.2}), f' = {:+.6}", net.eval(*x), net.eval_derivative(*x, 1)?);
    }

    let hold = period8_run(100 * PERIOD8.len(), false, 0)?;
    println!("100 periods from the half-period start: max deviation {:.2e}", peak(&hold.distance));

    let noisy = period8_run(200, true, 0)?;
    let r = noisy.recovery.expect("noise run measures recovery");
    println!(
        "noise on samples 21..=25: peak deviation {:.2e}, back under {:.2e} at sample {:?}",
        r.peak, r.floor, r.recovered_at
    );
    Ok(())
}
