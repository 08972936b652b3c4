//! Second- and third-derivative constraints need a smoother basis than the
//! cubic one; the Gaussian basis takes any order.
//!
//! cargo run --example gaussian_higher_order

use rbf_ols::trainer::CandidateGrid;
use rbf_ols::{train, BasisKind, TrainerConfig, TrainingSet};

fn main() -> rbf_ols::Result<()> {
    let x: Vec<f64> = (0..12).map(|k| k as f64 * 0.5).collect();
    let targets = vec![
        x.iter().map(|v| v.sin()).collect(),
        x.iter().map(|v| v.cos()).collect(),
        x.iter().map(|v| -v.sin()).collect(),
        x.iter().map(|v| -v.cos()).collect(),
    ];
    let data = TrainingSet::new(x.clone(), targets)?;
    let cfg = TrainerConfig::for_training_set(&data).with_grid(CandidateGrid::uniform(48)).with_tolerance(1e-6);
    let basis = BasisKind::gaussian(0.8)?;
    let (net, report) = train(&data, &cfg, basis)?;
    println!(
        "{} units, combined rms {:.2e} ({:?})",
        net.units(),
        report.final_rms().unwrap_or(f64::NAN),
        report.stopped_reason
    );
    for &xk in x.iter().step_by(3) {
        let got: Vec<String> =
            (0..4).map(|d| net.eval_derivative(xk, d).map(|v| format!("{v:+.5}"))).collect::<Result<_, _>>()?;
        println!("  x = {xk:.1}: f, f', f'', f''' = {}", got.join(", "));
    }
    println!("cubic at order 3: {}", BasisKind::Cubic.check_order(3).unwrap_err());
    Ok(())
}
