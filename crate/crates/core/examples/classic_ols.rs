//! Classic OLS on map values only, and the derivative-aware trainer with all
//! selection weight on the map channel: both pick the same centers in the
//! same order. The output layer of the second still fits both channels, so
//! the two are compared on a fixed unit budget rather than a tolerance.
//!
//! cargo run --example classic_ols

use rbf_ols::numerics::seeded_uniform;
use rbf_ols::trainer::CandidateGrid;
use rbf_ols::{train, train_classic, BasisKind, TrainerConfig, TrainingSet};

fn main() -> rbf_ols::Result<()> {
    let x: Vec<f64> = (0..25).map(|k| k as f64 / 24.0 * 6.0 - 3.0).collect();
    let noise = seeded_uniform(7, -0.02, 0.02, x.len())?;
    let t: Vec<f64> = x.iter().zip(&noise).map(|(v, e)| v.sin() * (-0.1 * v * v).exp() + e).collect();

    let values = TrainingSet::from_values(x.clone(), t.clone())?;
    let cfg = TrainerConfig::for_training_set(&values)
        .with_grid(CandidateGrid::uniform(40))
        .with_tolerance(0.0)
        .with_max_units(12);
    let (classic, classic_report) = train_classic(&values, &cfg)?;

    let d = x.iter().map(|v| v.cos()).collect();
    let with_slopes = TrainingSet::new(x, vec![t, d])?;
    let cfg_weighted = TrainerConfig { lambda: vec![1.0, 0.0], ..cfg };
    let (_, weighted_report) = train(&with_slopes, &cfg_weighted, BasisKind::Cubic)?;

    println!("classic: {} units, rms {:.4}", classic.units(), classic_report.final_rms().unwrap_or(f64::NAN));
    for (a, b) in classic_report.per_iteration.iter().zip(&weighted_report.per_iteration) {
        println!("  {:+.3} err {:.4}   {:+.3} err {:.4}", a.center, a.err[0], b.center, b.err[0]);
    }
    assert_eq!(classic_report.selected_centers, weighted_report.selected_centers);
    println!("selection orders agree");
    Ok(())
}
