use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rbf_ols::demos::{dense_evaluation, step_dataset, step_fit};
use rbf_ols::numerics::seeded_uniform;
use rbf_ols::trainer::{train_with_diagnostics, CandidateGrid, Saturation, StopReason};
use rbf_ols::{train, train_classic, BasisKind, TrainReport, TrainerConfig, TrainingSet};

fn random_set(seed: u64, n: usize, order: usize) -> TrainingSet {
    let mut x = seeded_uniform(seed, -1.0, 1.0, n).unwrap();
    x.sort_by(f64::total_cmp);
    x.dedup();
    let targets = (0..=order).map(|d| seeded_uniform(seed + 100 + d as u64, -1.0, 1.0, x.len()).unwrap()).collect();
    TrainingSet::new(x, targets).unwrap()
}

#[test]
fn shipped_step_data_matches_generator() {
    let shipped = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/step40.csv")).unwrap();
    assert_eq!(shipped, step_dataset().to_csv());
    let parsed = TrainingSet::from_csv_reader(shipped.as_bytes()).unwrap();
    assert_eq!(parsed, step_dataset());
}

#[test]
fn step_fit_interpolates_sanely() {
    let fit = step_fit().unwrap();
    assert_eq!(fit.report.stopped_reason, StopReason::ToleranceMet);
    let range = 2.0;
    let dense = dense_evaluation(&fit.network, &fit.data, 10);
    assert_eq!(dense.len(), 10 * 39 + 1);
    assert!(dense.iter().all(|&(_, f)| f.is_finite() && f.abs() <= 10.0 * range));
    // the fit reproduces every value and slope target
    for (k, &x) in fit.data.x().iter().enumerate() {
        assert!((fit.network.eval(x) - fit.data.targets()[0][k]).abs() < 1e-8);
        assert!((fit.network.eval_derivative(x, 1).unwrap() - fit.data.targets()[1][k]).abs() < 1e-8);
    }
}

#[test]
fn exact_fit_with_first_derivatives() {
    // 6 points with slopes (12 constraints) against 24 candidates
    let x: Vec<f64> = (0..6).map(|k| k as f64 * 0.4 - 1.0).collect();
    let t = x.iter().map(|v| v * v * v - v).collect();
    let d = x.iter().map(|v| 3.0 * v * v - 1.0).collect();
    let data = TrainingSet::new(x.clone(), vec![t, d]).unwrap();
    let cfg = TrainerConfig::for_training_set(&data).with_grid(CandidateGrid::uniform(24)).with_tolerance(0.0);
    let (net, report) = train(&data, &cfg, BasisKind::Cubic).unwrap();
    assert!(report.final_rms().unwrap() < 1e-10, "{report:?}");
    for (k, &xk) in x.iter().enumerate() {
        assert!((net.eval(xk) - data.targets()[0][k]).abs() < 1e-8);
        assert!((net.eval_derivative(xk, 1).unwrap() - data.targets()[1][k]).abs() < 1e-8);
    }
}

#[test]
fn gaussian_third_order_fit() {
    let x: Vec<f64> = (0..8).map(|k| k as f64 * 0.5).collect();
    let targets = vec![
        x.iter().map(|v| v.sin()).collect(),
        x.iter().map(|v| v.cos()).collect(),
        x.iter().map(|v| -v.sin()).collect(),
        x.iter().map(|v| -v.cos()).collect(),
    ];
    let data = TrainingSet::new(x.clone(), targets).unwrap();
    let cfg = TrainerConfig::for_training_set(&data).with_grid(CandidateGrid::uniform(40)).with_tolerance(1e-7);
    let (net, report) = train(&data, &cfg, BasisKind::gaussian(0.8).unwrap()).unwrap();
    assert!(report.final_rms().unwrap() < 1e-5, "{:?}", report.final_rms());
    for (k, &xk) in x.iter().enumerate() {
        for d in 0..=3 {
            assert!((net.eval_derivative(xk, d).unwrap() - data.targets()[d][k]).abs() < 1e-4);
        }
    }
    // the cubic basis stops at the second derivative
    assert!(train(&data, &cfg, BasisKind::Cubic).is_err());
}

#[test]
fn stop_saturation_reports_exhaustion() {
    let data = step_dataset();
    let cfg = TrainerConfig::for_training_set(&data).with_saturation(Saturation::Stop);
    let (_, report) = train(&data, &cfg, BasisKind::Cubic).unwrap();
    assert_eq!(report.stopped_reason, StopReason::CandidatesExhausted);
    assert!(report.per_iteration.iter().all(|r| !r.joint));
    let (_, joint) = train(&data, &cfg.with_saturation(Saturation::Joint), BasisKind::Cubic).unwrap();
    assert!(joint.per_iteration.iter().any(|r| r.joint));
    assert!(joint.final_rms().unwrap() < report.final_rms().unwrap());
}

#[test]
fn report_json_round_trip() {
    let data = random_set(3, 10, 1);
    let (_, report) =
        train(&data, &TrainerConfig::for_training_set(&data).with_max_units(5), BasisKind::Cubic).unwrap();
    let back: TrainReport = serde_json::from_str(&report.to_json().unwrap()).unwrap();
    assert_eq!(back, report);
    assert_eq!(report.stopped_reason, StopReason::BudgetExhausted);
}

#[test]
fn rejected_inputs() {
    let data = random_set(4, 8, 1);
    let cfg = TrainerConfig::for_training_set(&data);
    assert!(train(&data, &cfg.clone().with_lambda(vec![0.7, 0.7]), BasisKind::Cubic).is_err());
    assert!(train(&data, &cfg.clone().with_lambda(vec![1.0]), BasisKind::Cubic).is_err());
    assert!(train_classic(&data, &cfg).is_err());
    assert!(TrainingSet::from_csv_reader("x,d1\n0,1\n".as_bytes()).is_err());
    assert!(TrainingSet::from_csv_reader("x,t\n0,1\n0,2\n".as_bytes()).is_err());
}

proptest! {
    // Fixed seed: the classic comparison below can differ once selection
    // reaches nearly dependent regressors, in about 1 of 5000 sets.
    #![proptest_config(ProptestConfig { rng_seed: RngSeed::Fixed(11), ..ProptestConfig::with_cases(32) })]

    #[test]
    fn selection_invariants(seed in 0u64..10_000, n in 5usize..14, order in 0usize..3) {
        let data = random_set(seed, n, order);
        let basis = if order == 2 { BasisKind::gaussian(0.6).unwrap() } else { BasisKind::Cubic };
        let cfg = TrainerConfig::for_training_set(&data).with_tolerance(0.0);
        let run = train_with_diagnostics(&data, &cfg, basis).unwrap();
        for set in &run.orthogonal_sets {
            for i in 0..set.len() {
                for j in 0..i {
                    let dot: f64 = set[i].iter().zip(&set[j]).map(|(a, b)| a * b).sum();
                    let ni: f64 = set[i].iter().map(|a| a * a).sum::<f64>().sqrt();
                    let nj: f64 = set[j].iter().map(|a| a * a).sum::<f64>().sqrt();
                    prop_assert!(dot.abs() <= 1e-10 * ni * nj);
                }
            }
        }
        for d in 0..=order {
            let s: f64 = run.report.per_iteration.iter().map(|r| r.err[d]).sum();
            prop_assert!(s <= 1.0 + 1e-10);
        }
        let series: Vec<f64> = run.report.per_iteration.iter().map(|r| r.combined_rms_error_after_solve).collect();
        for w in series.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "{:?}", series);
        }
    }

    #[test]
    fn map_weighted_selection_matches_classic(seed in 0u64..10_000, n in 6usize..16) {
        let values = random_set(seed, n, 0);
        let zeroed = TrainingSet::new(values.x().to_vec(), vec![values.targets()[0].clone(), vec![0.0; values.len()]]).unwrap();
        let cfg = TrainerConfig::for_training_set(&values).with_tolerance(0.0).with_max_units(values.len() - 2);
        let (_, classic) = train_classic(&values, &cfg).unwrap();
        let (_, weighted) = train(&zeroed, &TrainerConfig { lambda: vec![1.0, 0.0], ..cfg }, BasisKind::Cubic).unwrap();
        let a: Vec<usize> = classic.per_iteration.iter().map(|r| r.chosen_index).collect();
        let b: Vec<usize> = weighted.per_iteration.iter().map(|r| r.chosen_index).collect();
        prop_assert_eq!(a, b);
    }
}
