//! Closes the loop through a hand-written saturating map, adds a noise burst,
//! and writes the trace and the network JSON the way the CLI does.
//!
//! cargo run --example custom_loop -- [out-dir]

use std::path::PathBuf;

use rbf_ols::feedback::{simulate, DisturbanceSchedule, FeedbackSystem, FirFilter, FnMap, LoopState, NoiseWindow};
use rbf_ols::io::write_atomic;
use rbf_ols::numerics::{linspace, seeded_uniform};
use rbf_ols::{train, BasisKind, RbfNetwork, TrainerConfig, TrainingSet};

fn main() -> rbf_ols::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let filter = FirFilter::new(0.4, 0.3)?;

    // the origin slope -3 is well past the startup bound for L = 20,
    // and tanh keeps the oscillation bounded
    let saturating = FeedbackSystem::new(20, Some(filter), FnMap(|x: f64| -(3.0 * x).tanh()))?;
    let init = LoopState::from_delay_line(&seeded_uniform(1, -0.01, 0.01, 20)?)?;
    let dist = DisturbanceSchedule {
        noise: Some(NoiseWindow { start: 300, end: 310, snr_db: 20.0, seed: 2, reference_rms: 1.0 }),
        coeff_perturb: None,
    };
    let trace = simulate(&saturating, &init, 600, &dist)?;
    let tail = &trace.outputs[500..];
    println!(
        "tanh loop: output range over the last 100 samples [{:+.3}, {:+.3}], {} noise events",
        tail.iter().copied().fold(f64::INFINITY, f64::min),
        tail.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        trace.events.len()
    );

    // the same map learned from samples with its slopes, then round-tripped
    let x = linspace(-1.5, 1.5, 15);
    let t = x.iter().map(|v| -(3.0 * v).tanh()).collect();
    let d = x.iter().map(|v| -3.0 / (3.0 * v).cosh().powi(2)).collect();
    let data = TrainingSet::new(x, vec![t, d])?;
    let (net, report) = train(&data, &TrainerConfig::for_training_set(&data).with_tolerance(1e-3), BasisKind::Cubic)?;
    println!("learned map: {} units, rms {:.2e}", net.units(), report.final_rms().unwrap_or(f64::NAN));

    let json = net.to_json()?;
    let back = RbfNetwork::from_json(&json)?;
    assert_eq!(back, net);
    let learned = FeedbackSystem::new(20, Some(filter), back)?;
    let learned_trace = simulate(&learned, &init, 600, &dist)?;
    let gap =
        trace.outputs.iter().zip(&learned_trace.outputs).take(300).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("largest gap to the tanh loop before the noise: {gap:.3}");

    write_atomic(out.join("custom_loop.model.json"), json)?;
    write_atomic(out.join("custom_loop.trace.csv"), learned_trace.to_csv())?;
    write_atomic(out.join("custom_loop.events.json"), learned_trace.events_json()?)?;
    println!("wrote custom_loop.{{model.json,trace.csv,events.json}} to {}", out.display());
    Ok(())
}
