//! The eight acceptance criteria, each timed against its runtime limit.
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! PASS/FAIL lines.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rbf_ols::demos::{
    dense_evaluation, oscillator_run, period8_run, perturb_run, step_fit, PERIOD8, PERIOD8_NOISE, PERTURB_FILTER,
    PERTURB_WINDOW, STEP_POINTS,
};
use rbf_ols::feedback::{
    default_grid_size, jacobian_char_poly, jacobian_matrix, nyquist_q, oscillation_slope_bound, stability_margin,
};
use rbf_ols::numerics::{circ_conv, finite_difference, lstsq, poly_eval, poly_roots, ComplexRoot, Matrix};
use rbf_ols::trainer::{train_with_diagnostics, CandidateGrid};
use rbf_ols::{train, train_classic, BasisKind, RbfNetwork, TrainerConfig, TrainingSet};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn nyquist_reproduction() -> Outcome {
    let q = nyquist_q(0.4, 0.3, 100, default_grid_size(100), 1e-12).map_err(|e| e.to_string())?;
    let bound = oscillation_slope_bound(q).map_err(|e| e.to_string())?;
    check((0.695..=0.705).contains(&q), || format!("q = {q}"))?;
    check((bound + 1.4286).abs() <= 0.005, || format!("slope bound {bound}"))?;
    Ok(format!("q = {q:.5}, slope bound {bound:.4}"))
}

fn stability_margin_criterion() -> Outcome {
    let m = stability_margin(3, 0.1, 0.5, 1e-10).map_err(|e| e.to_string())?;
    let oracle = 1.0 / (0.1 + 0.5);
    check((m.d_star - 1.667).abs() <= 0.001, || format!("d* = {}", m.d_star))?;
    check((m.d_star - oracle).abs() <= 1e-6, || format!("d* = {} vs 1/(b1+b2) = {oracle}", m.d_star))?;
    Ok(format!("d* = {:.6}, 1/(b1+b2) = {oracle:.6}", m.d_star))
}

fn oscillation_dichotomy() -> Outcome {
    let decay = oscillator_run(-1.2, 0).map_err(|e| e.to_string())?;
    check(decay.late_peak < 0.5 * decay.early_peak, || {
        format!("S1 = -1.2: late peak {} vs early {}", decay.late_peak, decay.early_peak)
    })?;
    let sustain = oscillator_run(-2.0, 0).map_err(|e| e.to_string())?;
    check(sustain.late_peak >= 0.5 * sustain.early_peak, || {
        format!("S1 = -2: late peak {} vs early {}", sustain.late_peak, sustain.early_peak)
    })?;
    let period = sustain.period.ok_or("S1 = -2: no dominant period")?;
    check(period.abs_diff(200) <= 2, || format!("S1 = -2: period {period}"))?;
    Ok(format!(
        "decay {:.2e} -> {:.2e}; sustain {:.2e} -> {:.2e}, period {period}",
        decay.early_peak, decay.late_peak, sustain.early_peak, sustain.late_peak
    ))
}

fn derivative_constrained_fit() -> Outcome {
    let fit = step_fit().map_err(|e| e.to_string())?;
    let rms = fit.report.final_rms().ok_or("no iterations")?;
    check(rms < 1e-6, || format!("combined rms {rms}"))?;
    check(fit.network.units() <= 2 * STEP_POINTS, || format!("{} units", fit.network.units()))?;
    check(fit.report.candidate_count == 2 * STEP_POINTS, || format!("{} candidates", fit.report.candidate_count))?;
    let series: Vec<f64> = fit.report.per_iteration.iter().map(|r| r.combined_rms_error_after_solve).collect();
    let bad = series.windows(2).position(|w| w[1] > w[0] + 1e-12);
    check(bad.is_none(), || format!("residual rises after unit {}", bad.unwrap_or(0) + 1))?;
    let dense = dense_evaluation(&fit.network, &fit.data, 10);
    check(dense.iter().all(|p| p.1.is_finite() && p.1.abs() <= 20.0), || "dense evaluation out of range".into())?;
    Ok(format!("{} units, combined rms {rms:.2e}", fit.network.units()))
}

fn period_noise_rejection() -> Outcome {
    let hold = period8_run(100 * PERIOD8.len(), false, 0).map_err(|e| e.to_string())?;
    let dev = hold.distance.iter().copied().fold(0.0, f64::max);
    check(dev < 1e-6, || format!("hold deviation {dev}"))?;
    let noisy = period8_run(200, true, 0).map_err(|e| e.to_string())?;
    let r = noisy.recovery.ok_or("no recovery measurement")?;
    let at = r.recovered_at.ok_or_else(|| format!("never recovered (peak {})", r.peak))?;
    let limit = PERIOD8_NOISE.1 + 10 * PERIOD8.len();
    check(at <= limit, || format!("recovered at {at}, limit {limit}"))?;
    check(r.peak > r.floor, || "noise had no effect".into())?;
    Ok(format!("hold {dev:.2e}; noise peak {:.2e}, back under {:.2e} at sample {at}", r.peak, r.floor))
}

fn perturbation_dichotomy() -> Outcome {
    let ok = perturb_run(1.0, 0).map_err(|e| e.to_string())?;
    let r = ok.recovery.ok_or("no recovery measurement")?;
    let at = r.recovered_at.ok_or_else(|| format!("d = 1.0 never recovered (peak {})", r.peak))?;
    let bad = perturb_run(1.8, 0).map_err(|e| e.to_string())?;
    let rb = bad.recovery.ok_or("no recovery measurement")?;
    let horizon = PERTURB_WINDOW.1 + 500;
    check(rb.recovered_at.is_none_or(|n| n > horizon), || format!("d = 1.8 recovered at {:?}", rb.recovered_at))?;
    let (b1, b2) = PERTURB_FILTER;
    check(1.0 < 1.0 / (b1 + b2) && 1.8 > 1.0 / (b1 + b2), || "slopes do not straddle the margin".into())?;
    Ok(format!("d = 1.0 recovered at {at}; d = 1.8 peak {:.2e}, not recovered", rb.peak))
}

fn random_values(rng: &mut ChaCha8Rng, n: usize) -> TrainingSet {
    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    x.sort_by(f64::total_cmp);
    let t = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    TrainingSet::from_values(x, t).unwrap()
}

/// Solves the normal equations by Gaussian elimination with partial pivoting.
fn normal_equations(a: &Matrix, y: &[f64]) -> Vec<f64> {
    let n = a.cols();
    let mut m = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = (0..a.rows()).map(|k| a[(k, i)] * a[(k, j)]).sum();
        }
        m[i][n] = (0..a.rows()).map(|k| a[(k, i)] * y[k]).sum();
    }
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, p);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            let (top, rest) = m.split_at_mut(r);
            for (v, pv) in rest[0][c..].iter_mut().zip(&top[c][c..]) {
                *v -= f * pv;
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        x[r] = (m[r][n] - (r + 1..n).map(|k| m[r][k] * x[k]).sum::<f64>()) / m[r][r];
    }
    x
}

/// Determinant by cofactor expansion along the first row.
fn det(m: &[Vec<f64>]) -> f64 {
    if m.len() == 1 {
        return m[0][0];
    }
    (0..m.len())
        .map(|j| {
            let minor: Vec<Vec<f64>> = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| *v).collect())
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * m[0][j] * det(&minor)
        })
        .sum()
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    // (a) all selection weight on the map channel reproduces classic OLS
    for case in 0..20 {
        let values = random_values(&mut rng, 16);
        let zeroed = TrainingSet::new(values.x().to_vec(), vec![values.targets()[0].clone(), vec![0.0; 16]]).unwrap();
        let cfg = TrainerConfig::for_training_set(&values).with_tolerance(0.0).with_max_units(10);
        let (_, classic) = train_classic(&values, &cfg).map_err(|e| e.to_string())?;
        let cfg1 = TrainerConfig { lambda: vec![1.0, 0.0], ..cfg };
        let (_, weighted) = train(&zeroed, &cfg1, BasisKind::Cubic).map_err(|e| e.to_string())?;
        let a: Vec<usize> = classic.per_iteration.iter().map(|r| r.chosen_index).collect();
        let b: Vec<usize> = weighted.per_iteration.iter().map(|r| r.chosen_index).collect();
        check(a == b, || format!("(a) dataset {case}: {a:?} vs {b:?}"))?;
    }

    // (b) SVD least squares against the normal equations
    let mut worst_b = 0.0f64;
    for case in 0..50 {
        let data = (0..40).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = Matrix::new(10, 4, data).unwrap();
        let y: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
        let got = lstsq(&a, &y, 1e-12).map_err(|e| e.to_string())?;
        let want = normal_equations(&a, &y);
        let resid = |x: &[f64]| a.mul_vec(x).iter().zip(&y).map(|(f, t)| (f - t).powi(2)).sum::<f64>().sqrt();
        let gap = (got.residual_norm - resid(&want)).abs();
        let xgap = got.x.iter().zip(&want).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        worst_b = worst_b.max(gap).max(xgap);
        check(gap <= 1e-8 && xgap <= 1e-8, || format!("(b) system {case}: residual gap {gap}, solution gap {xgap}"))?;
    }

    // (c) characteristic polynomial against det(zI - J) at sample points
    let mut worst_c = 0.0f64;
    for l in 1..=5 {
        for _ in 0..5 {
            let (b1, b2, d) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-3.0..3.0));
            let coeffs = jacobian_char_poly(l, b1, b2, d).map_err(|e| e.to_string())?;
            let j = jacobian_matrix(l, b1, b2, d).map_err(|e| e.to_string())?;
            for &z in &[-1.3, -0.4, 0.0, 0.7, 1.9, 2.5] {
                let m: Vec<Vec<f64>> =
                    (0..=l).map(|r| (0..=l).map(|c| if r == c { z } else { 0.0 } - j[(r, c)]).collect()).collect();
                let want = det(&m);
                let got = poly_eval(&coeffs, ComplexRoot { re: z, im: 0.0 });
                let gap = (got.re - want).abs();
                worst_c = worst_c.max(gap);
                check(gap <= 1e-10 * (1.0 + want.abs()) && got.im == 0.0, || {
                    format!("(c) L = {l}, z = {z}: {} vs {want}", got.re)
                })?;
            }
        }
    }

    // (d) analytic derivatives against central differences
    let mut worst_d = 0.0f64;
    let h = 1e-5;
    for case in 0..100 {
        let units = rng.random_range(1..8);
        let centers: Vec<f64> = (0..units).map(|_| rng.random_range(-1.0..1.0)).collect();
        let weights: Vec<f64> = (0..units).map(|_| rng.random_range(-1.0..1.0)).collect();
        let basis =
            if case % 2 == 0 { BasisKind::Cubic } else { BasisKind::gaussian(rng.random_range(0.3..1.0)).unwrap() };
        let top = if case % 2 == 0 { 2 } else { 3 };
        let net = RbfNetwork::new(basis, centers.clone(), weights, rng.random_range(-1.0..1.0), top).unwrap();
        let mut probes = 0;
        while probes < 5 {
            let x = rng.random_range(-1.2..1.2);
            // the cubic basis has a kink in its second derivative at each center
            if centers.iter().any(|c| (x - c).abs() < 10.0 * h) {
                continue;
            }
            probes += 1;
            for order in 1..=top {
                let an = net.eval_derivative(x, order).map_err(|e| e.to_string())?;
                let lower = |v: f64| net.eval_derivative(v, order - 1).unwrap();
                let fd = finite_difference(lower, x, 1, h).map_err(|e| e.to_string())?;
                let rel = (an - fd).abs() / an.abs().max(1.0);
                worst_d = worst_d.max(rel);
                check(rel < 1e-6, || format!("(d) network {case}, order {order}, x = {x}: {an} vs {fd}"))?;
            }
        }
    }
    Ok(format!("(b) {worst_b:.1e}, (c) {worst_c:.1e}, (d) {worst_d:.1e}"))
}

fn invariant_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_orth = 0.0f64;
    let mut worst_sum = 0.0f64;
    for case in 0..12 {
        let n = rng.random_range(8..20);
        let order = case % 3;
        let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        x.sort_by(f64::total_cmp);
        x.dedup();
        let targets: Vec<Vec<f64>> =
            (0..=order).map(|_| x.iter().map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let ts = TrainingSet::new(x, targets).unwrap();
        let basis = if order == 2 { BasisKind::gaussian(0.7).unwrap() } else { BasisKind::Cubic };
        let cfg = TrainerConfig::for_training_set(&ts).with_grid(CandidateGrid::uniform(3 * n)).with_tolerance(0.0);
        let run = train_with_diagnostics(&ts, &cfg, basis).map_err(|e| e.to_string())?;

        for (d, set) in run.orthogonal_sets.iter().enumerate() {
            for i in 0..set.len() {
                for j in 0..i {
                    let dot: f64 = set[i].iter().zip(&set[j]).map(|(a, b)| a * b).sum();
                    let ni: f64 = set[i].iter().map(|a| a * a).sum::<f64>().sqrt();
                    let nj: f64 = set[j].iter().map(|a| a * a).sum::<f64>().sqrt();
                    let c = dot.abs() / (ni * nj);
                    worst_orth = worst_orth.max(c);
                    check(c <= 1e-10, || format!("case {case}: order {d} regressors {i}, {j}: cosine {c}"))?;
                }
            }
        }
        for d in 0..=order {
            let s: f64 = run.report.per_iteration.iter().map(|r| r.err[d]).sum();
            worst_sum = worst_sum.max(s);
            check(s <= 1.0 + 1e-10, || format!("case {case}: order {d} err sum {s}"))?;
        }
        let series: Vec<f64> = run.report.per_iteration.iter().map(|r| r.combined_rms_error_after_solve).collect();
        let rise = series.windows(2).position(|w| w[1] > w[0] + 1e-12);
        check(rise.is_none(), || format!("case {case}: residual rises at unit {}", rise.unwrap_or(0) + 2))?;
    }

    for case in 0..200 {
        let l = rng.random_range(1..30);
        let x: Vec<f64> = (0..l).map(|_| f64::from(rng.random_range(-1000..1000)) / 64.0).collect();
        let h = [f64::from(rng.random_range(-64..64)) / 64.0, f64::from(rng.random_range(-64..64)) / 64.0];
        let y = circ_conv(h, &x);
        let lhs = y.iter().sum::<f64>() / l as f64;
        let rhs = (h[0] + h[1]) * x.iter().sum::<f64>() / l as f64;
        check(lhs == rhs, || format!("circ_conv case {case}: {lhs} vs {rhs}"))?;
    }

    // The absolute contract holds where f64 can evaluate p near its roots:
    // with a unit leading coefficient every root lies inside |z| < 2. For
    // arbitrary leading coefficients the roots can be large and the residual
    // is measured against the size of the terms being cancelled.
    let mut worst_root = 0.0f64;
    let mut worst_backward = 0.0f64;
    for case in 0..400 {
        let deg = rng.random_range(1..=12);
        let mut c: Vec<f64> = (0..=deg).map(|_| rng.random_range(-1.0..1.0)).collect();
        let unit_lead = case % 2 == 0;
        if unit_lead {
            c[0] = if c[0] < 0.0 { -1.0 } else { 1.0 };
        } else if c[0].abs() < 0.05 {
            c[0] = 0.5;
        }
        let scale = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let roots = poly_roots(&c).map_err(|e| e.to_string())?;
        check(roots.len() == deg, || format!("roots case {case}: {} roots for degree {deg}", roots.len()))?;
        for z in &roots {
            let r = poly_eval(&c, *z).norm();
            let terms: f64 = c.iter().enumerate().map(|(i, ci)| ci.abs() * z.norm().powi((deg - i) as i32)).sum();
            worst_backward = worst_backward.max(r / terms);
            check(r <= 1e-12 * terms, || format!("roots case {case}: |p(z)| = {r} against terms {terms}"))?;
            if unit_lead {
                worst_root = worst_root.max(r / scale);
                check(r <= 1e-8 * scale, || format!("roots case {case}: |p(z)| = {r}"))?;
            }
        }
        let (mut pr, mut pi) = (1.0, 0.0);
        for z in &roots {
            (pr, pi) = (pr * z.re - pi * z.im, pr * z.im + pi * z.re);
        }
        let want = if deg % 2 == 0 { 1.0 } else { -1.0 } * c[deg] / c[0];
        check((pr - want).abs() <= 1e-6 * want.abs().max(1e-300) && pi.abs() <= 1e-6 * (want.abs() + 1e-12), || {
            format!("roots case {case}: product {pr} + {pi}j, want {want}")
        })?;
    }
    Ok(format!("cosine {worst_orth:.1e}, err sum {worst_sum:.6}, root residual {worst_root:.1e} (backward {worst_backward:.1e})"))
}

/// Name, check and time limit in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("nyquist reproduction", nyquist_reproduction, 1),
        ("stability margin", stability_margin_criterion, 1),
        ("oscillation dichotomy", oscillation_dichotomy, 10),
        ("derivative-constrained fit", derivative_constrained_fit, 5),
        ("period stabilization and noise rejection", period_noise_rejection, 5),
        ("perturbation dichotomy", perturbation_dichotomy, 5),
        ("oracle equivalence", oracle_equivalence, 10),
        ("invariant suite", invariant_suite, 10),
    ];
    let mut failures = Vec::new();
    for (k, (name, run, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|msg| {
            if elapsed <= Duration::from_secs(limit) {
                Ok(msg)
            } else {
                Err(format!("{msg}; took {elapsed:.2?}, limit {limit} s"))
            }
        });
        match outcome {
            Ok(msg) => println!("PASS {} {name} ({elapsed:.2?}): {msg}", k + 1),
            Err(msg) => {
                println!("FAIL {} {name} ({elapsed:.2?}): {msg}", k + 1);
                failures.push(k + 1);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
