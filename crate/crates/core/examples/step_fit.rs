//! Fits the shipped step dataset (values plus slope targets that fight the
//! jump) and evaluates the network on a ten times denser grid.
//!
//! cargo run --example step_fit

use std::fs::File;

use rbf_ols::demos::dense_evaluation;
use rbf_ols::{train, BasisKind, TrainerConfig, TrainingSet};

fn main() -> rbf_ols::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/step40.csv");
    let data = TrainingSet::from_csv_reader(File::open(path)?)?;
    let cfg = TrainerConfig::for_training_set(&data);
    let (net, report) = train(&data, &cfg, BasisKind::Cubic)?;

    println!("{} points, {} candidates, {} units selected", data.len(), report.candidate_count, net.units());
    for (h, it) in report.per_iteration.iter().enumerate().step_by(10) {
        println!("  unit {:>2} at {:+.4}: combined rms {:.3e}", h + 1, it.center, it.combined_rms_error_after_solve);
    }
    println!("final combined rms {:.3e} ({:?})", report.final_rms().unwrap_or(f64::NAN), report.stopped_reason);

    let dense = dense_evaluation(&net, &data, 10);
    let worst = dense.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    println!("{} dense points, max |f| = {worst:.3}", dense.len());
    for x in [-0.1, -0.05, 0.0, 0.05, 0.1] {
        println!("  f({x:+.2}) = {:+.4}   f'({x:+.2}) = {:+.4}", net.eval(x), net.eval_derivative(x, 1)?);
    }
    Ok(())
}
