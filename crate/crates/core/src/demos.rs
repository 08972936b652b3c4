//! Deterministic reference experiments.
//!
//! Each experiment is available as a function returning its numbers, and as
//! a named demo that renders those numbers into CSV/JSON files together with
//! a `MANIFEST.json` tying every file to the acceptance property it backs.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::feedback::{
    build_oscillator_map_spec, build_period_training_set, build_period_training_set_with, distance_to_orbit,
    max_root_magnitude, measure_recovery, nyquist_q, oscillation_slope_bound, oscillator_fixed_points, rms, simulate,
    stability_margin, CoefficientPerturbation, ConvolutionMode, DisturbanceSchedule, FeedbackSystem, FirFilter,
    LoopState, NoiseWindow, PeriodOptions, Recovery, SimulationTrace, SlopeSign,
};
use crate::io::write_atomic;
use crate::model::{BasisKind, RbfNetwork};
use crate::numerics::{linspace, seeded_uniform};
use crate::trainer::{train, CandidateGrid, TrainReport, TrainerConfig, TrainingSet};

// ---------------------------------------------------------------- step fit

pub const STEP_POINTS: usize = 40;

/// Forty evenly spaced points on `[-1, 1]` of a unit step from -1 to 1.
/// Inside `|x| < 0.2` the slope target is -2, against the jump; elsewhere 0.
pub fn step_dataset() -> TrainingSet {
    let n = STEP_POINTS;
    let x: Vec<f64> = (0..n).map(|k| -1.0 + 2.0 * k as f64 / (n - 1) as f64).collect();
    let t = x.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    let d = x.iter().map(|&v| if v.abs() < 0.2 { -2.0 } else { 0.0 }).collect();
    TrainingSet::new(x, vec![t, d]).expect("step dataset is well formed")
}

pub struct StepFit {
    pub data: TrainingSet,
    pub network: RbfNetwork,
    pub report: TrainReport,
}

/// Cubic network on the step data with the default configuration
/// (about `2N` candidates, equal channel weights).
pub fn step_fit() -> Result<StepFit> {
    let data = step_dataset();
    let cfg = TrainerConfig::for_training_set(&data);
    let (network, report) = train(&data, &cfg, BasisKind::Cubic)?;
    Ok(StepFit { data, network, report })
}

/// `(x, f(x))` on a grid `factor` times denser than the training inputs.
pub fn dense_evaluation(net: &RbfNetwork, data: &TrainingSet, factor: usize) -> Vec<(f64, f64)> {
    let x = data.x();
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    linspace(lo, hi, factor * (x.len() - 1) + 1).into_iter().map(|v| (v, net.eval(v))).collect()
}

// -------------------------------------------------------------- oscillator

pub const OSCILLATOR_DELAY: usize = 100;
pub const OSCILLATOR_FILTER: (f64, f64) = (0.4, 0.3);
pub const OSCILLATOR_OUTER_SLOPE: f64 = -0.1;
pub const OSCILLATOR_STEPS: usize = 5000;
/// Origin slopes on both sides of the startup bound of about -1.43.
pub const OSCILLATOR_SLOPES: [f64; 4] = [-1.2, -1.4, -1.65, -2.0];

/// Cubic map through `(0, 0)` and `(∓100, ±100)` with slope `s1` at the
/// origin and -0.1 at the outer points.
pub fn oscillator_map(s1: f64) -> Result<(RbfNetwork, TrainReport)> {
    let data = build_oscillator_map_spec(s1, OSCILLATOR_OUTER_SLOPE, &oscillator_fixed_points(100.0))?;
    // An odd target over symmetric candidates: seven are needed for three
    // independent odd combinations.
    let cfg = TrainerConfig::for_training_set(&data).with_grid(CandidateGrid::uniform(7));
    train(&data, &cfg, BasisKind::Cubic)
}

pub struct OscillatorRun {
    pub s1: f64,
    pub network: RbfNetwork,
    pub trace: SimulationTrace,
    /// Largest `|output|` over the first and last thousand samples.
    pub early_peak: f64,
    pub late_peak: f64,
    /// Autocorrelation period over the last two thousand samples.
    pub period: Option<usize>,
}

pub fn oscillator_run(s1: f64, seed: u64) -> Result<OscillatorRun> {
    let (network, _) = oscillator_map(s1)?;
    let (b1, b2) = OSCILLATOR_FILTER;
    let sys = FeedbackSystem::new(OSCILLATOR_DELAY, Some(FirFilter::new(b1, b2)?), &network)?;
    let init = LoopState::from_delay_line(&seeded_uniform(seed, -0.1, 0.1, OSCILLATOR_DELAY)?)?;
    let trace = simulate(&sys, &init, OSCILLATOR_STEPS, &DisturbanceSchedule::none())?;
    let n = trace.outputs.len();
    let early_peak = peak(&trace.outputs[..1000]);
    let late_peak = peak(&trace.outputs[n - 1000..]);
    let period = dominant_period(&trace.outputs[n - 2000..], 20, 600);
    Ok(OscillatorRun { s1, network, trace, early_peak, late_peak, period })
}

/// Largest absolute value; NaN counts as infinite so a blown-up trace
/// never reads as a quiet one.
pub fn peak(signal: &[f64]) -> f64 {
    signal.iter().fold(0.0, |m, v| if v.is_nan() { f64::INFINITY } else { m.max(v.abs()) })
}

/// Lag in `[min_lag, max_lag]` with the largest autocorrelation of the
/// mean-removed signal, or `None` for a flat signal.
pub fn dominant_period(signal: &[f64], min_lag: usize, max_lag: usize) -> Option<usize> {
    let n = signal.len();
    if n == 0 || min_lag == 0 || min_lag > max_lag || max_lag >= n {
        return None;
    }
    let mean = signal.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = signal.iter().map(|v| v - mean).collect();
    let power: f64 = c.iter().map(|v| v * v).sum();
    if !(power > 0.0) {
        return None;
    }
    let mut best: Option<(usize, f64)> = None;
    for lag in min_lag..=max_lag {
        let r = (0..n - lag).map(|i| c[i] * c[i + lag]).sum::<f64>() / (n - lag) as f64;
        if best.is_none_or(|(_, b)| r > b) {
            best = Some((lag, r));
        }
    }
    best.map(|b| b.0)
}

// -------------------------------------------------------- 8-sample period

pub const PERIOD8: [f64; 8] = [0.9, 0.5, -0.2, -0.7, -0.95, -0.4, 0.1, 0.6];
pub const PERIOD8_SLOPE: f64 = 0.3;
pub const PERIOD8_NOISE: (usize, usize) = (21, 25);
pub const PERIOD8_SNR_DB: f64 = 46.0;

/// Map sending each half of [`PERIOD8`] onto the other with slope magnitude
/// 0.3 at all eight points.
pub fn period8_map() -> Result<(TrainingSet, RbfNetwork, TrainReport)> {
    let data = build_period_training_set(&PERIOD8, None, PERIOD8_SLOPE)?;
    let cfg = TrainerConfig::for_training_set(&data).with_tolerance(1e-12);
    let (net, report) = train(&data, &cfg, BasisKind::Cubic)?;
    Ok((data, net, report))
}

pub struct OrbitRun {
    pub network: RbfNetwork,
    pub trace: SimulationTrace,
    pub distance: Vec<f64>,
    pub recovery: Option<Recovery>,
}

/// Filterless `L = 4` loop started from the first half-period, with the
/// optional 46 dB noise burst on samples 21 to 25.
pub fn period8_run(steps: usize, with_noise: bool, seed: u64) -> Result<OrbitRun> {
    let (_, network, _) = period8_map()?;
    let l = PERIOD8.len() / 2;
    let sys = FeedbackSystem::new(l, None, &network)?;
    let init = LoopState::from_half_period(&PERIOD8)?;
    let dist = DisturbanceSchedule {
        noise: with_noise.then(|| NoiseWindow {
            start: PERIOD8_NOISE.0,
            end: PERIOD8_NOISE.1,
            snr_db: PERIOD8_SNR_DB,
            seed,
            reference_rms: rms(&PERIOD8),
        }),
        coeff_perturb: None,
    };
    let trace = simulate(&sys, &init, steps, &dist)?;
    let distance = distance_to_orbit(&trace.outputs, &PERIOD8);
    let recovery =
        with_noise.then(|| measure_recovery(&distance, PERIOD8_NOISE.0, PERIOD8_NOISE.1, PERIOD8.len())).transpose()?;
    Ok(OrbitRun { network, trace, distance, recovery })
}

// ----------------------------------------------- coefficient perturbation

pub const PERTURB_DELAY: usize = 3;
pub const PERTURB_FILTER: (f64, f64) = (0.1, 0.5);
pub const PERTURB_PERIOD: [f64; 6] = [0.24, -0.57, -0.75, 0.86, 0.78, 0.17];
pub const PERTURB_WINDOW: (usize, usize) = (44, 48);
pub const PERTURB_BOUND: f64 = 0.02;
pub const PERTURB_STEPS: usize = 600;

/// Map holding [`PERTURB_PERIOD`] as an exact orbit of the filtered `L = 3`
/// loop, with slope `d` at every orbit input.
///
/// The inputs are the whole period convolved with the filter, so the loop
/// started on the orbit stays there. One slope sign at every point makes
/// the orbit's monodromy a power of a single Jacobian whose spectral radius
/// crosses 1 at the margin.
pub fn perturb_map(d: f64) -> Result<RbfNetwork> {
    let (b1, b2) = PERTURB_FILTER;
    let options = PeriodOptions { convolution: ConvolutionMode::FullPeriod, slope_sign: SlopeSign::Positive };
    let orbit = build_period_training_set_with(&PERTURB_PERIOD, Some(FirFilter::new(b1, b2)?), d, options)?;
    // Same-sign slopes against the alternating targets make a wiggly map.
    // Zero curvature at the orbit inputs keeps it close to its tangent lines
    // over the few hundredths a jittered coefficient moves the state.
    let mut targets = orbit.targets().to_vec();
    targets.push(vec![0.0; orbit.len()]);
    let data = TrainingSet::new(orbit.x().to_vec(), targets)?;
    let cfg = TrainerConfig::for_training_set(&data).with_tolerance(1e-12).with_grid(CandidateGrid::uniform(40));
    Ok(train(&data, &cfg, BasisKind::Cubic)?.0)
}

/// Loop started on the orbit, coefficients jittered by at most 0.02 over
/// samples 44 to 48.
pub fn perturb_run(d: f64, seed: u64) -> Result<OrbitRun> {
    let network = perturb_map(d)?;
    let (b1, b2) = PERTURB_FILTER;
    let filter = FirFilter::new(b1, b2)?;
    let sys = FeedbackSystem::new(PERTURB_DELAY, Some(filter), &network)?;
    let init = LoopState::on_orbit(&PERTURB_PERIOD, Some(filter))?;
    let dist = DisturbanceSchedule {
        noise: None,
        coeff_perturb: Some(CoefficientPerturbation {
            start: PERTURB_WINDOW.0,
            end: PERTURB_WINDOW.1,
            bound: PERTURB_BOUND,
            seed,
        }),
    };
    let trace = simulate(&sys, &init, PERTURB_STEPS, &dist)?;
    let distance = distance_to_orbit(&trace.outputs, &PERTURB_PERIOD);
    let recovery = Some(measure_recovery(&distance, PERTURB_WINDOW.0, PERTURB_WINDOW.1, PERTURB_PERIOD.len())?);
    Ok(OrbitRun { network, trace, distance, recovery })
}

// ------------------------------------------------------------ rendering

/// One generated file and the property it supports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoFile {
    pub file: String,
    pub criterion_id: String,
    #[serde(skip)]
    pub contents: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DemoOutput {
    pub files: Vec<DemoFile>,
}

impl DemoOutput {
    fn add(&mut self, file: impl Into<String>, criterion_id: &str, contents: impl Into<String>) {
        self.files.push(DemoFile {
            file: file.into(),
            criterion_id: criterion_id.to_string(),
            contents: contents.into(),
        });
    }

    pub fn manifest_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.files)? + "\n")
    }

    /// Writes every file plus `MANIFEST.json` into `dir`, creating it if needed.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        for f in &self.files {
            write_atomic(dir.join(&f.file), &f.contents)?;
        }
        write_atomic(dir.join("MANIFEST.json"), self.manifest_json()?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemoName {
    Step,
    Oscillator,
    Period8,
    Perturb,
}

impl DemoName {
    pub const ALL: [DemoName; 4] = [DemoName::Step, DemoName::Oscillator, DemoName::Period8, DemoName::Perturb];

    pub fn as_str(&self) -> &'static str {
        match self {
            DemoName::Step => "step",
            DemoName::Oscillator => "oscillator",
            DemoName::Period8 => "period8",
            DemoName::Perturb => "perturb",
        }
    }
}

impl fmt::Display for DemoName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DemoName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DemoName::ALL.into_iter().find(|d| d.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = DemoName::ALL.iter().map(|d| d.as_str()).collect();
            Error::invalid(format!("unknown demo '{s}'; available: {}", names.join(", ")))
        })
    }
}

pub fn run_demo(name: DemoName, seed: u64) -> Result<DemoOutput> {
    match name {
        DemoName::Step => step_demo(),
        DemoName::Oscillator => oscillator_demo(seed),
        DemoName::Period8 => period8_demo(seed),
        DemoName::Perturb => perturb_demo(seed),
    }
}

fn pairs_csv(header: &str, rows: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut out = format!("{header}\n");
    for (a, b) in rows {
        out.push_str(&format!("{a},{b}\n"));
    }
    out
}

fn series_csv(header: &str, values: &[f64]) -> String {
    let mut out = format!("{header}\n");
    for (n, v) in values.iter().enumerate() {
        out.push_str(&format!("{n},{v}\n"));
    }
    out
}

fn pretty(v: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn step_demo() -> Result<DemoOutput> {
    const ID: &str = "derivative-constrained-fit";
    let fit = step_fit()?;
    let mut out = DemoOutput::default();
    out.add("step_training.csv", ID, fit.data.to_csv());
    out.add("step_model.json", ID, fit.network.to_json()? + "\n");
    out.add("step_report.json", ID, fit.report.to_json()? + "\n");
    let residuals: Vec<f64> = fit.report.per_iteration.iter().map(|r| r.combined_rms_error_after_solve).collect();
    out.add("step_residual.csv", ID, series_csv("iteration,combined_rms", &residuals));
    out.add(
        "step_dense_eval.csv",
        "interpolation-sanity",
        pairs_csv("x,f", dense_evaluation(&fit.network, &fit.data, 10)),
    );
    Ok(out)
}

fn oscillator_demo(seed: u64) -> Result<DemoOutput> {
    const ID: &str = "oscillation-dichotomy";
    let (b1, b2) = OSCILLATOR_FILTER;
    let q = nyquist_q(b1, b2, OSCILLATOR_DELAY, crate::feedback::default_grid_size(OSCILLATOR_DELAY), 1e-12)?;
    let mut out = DemoOutput::default();
    out.add(
        "nyquist.json",
        "nyquist-reproduction",
        pretty(&json!({ "b1": b1, "b2": b2, "delay": OSCILLATOR_DELAY, "q": q, "slope_bound": oscillation_slope_bound(q)? }))?,
    );
    let mut summary = Vec::new();
    for s1 in OSCILLATOR_SLOPES {
        let run = oscillator_run(s1, seed)?;
        let tag = format!("s1_{:.2}", s1.abs()).replace('.', "p");
        out.add(format!("oscillator_{tag}_model.json"), ID, run.network.to_json()? + "\n");
        out.add(format!("oscillator_{tag}_trace.csv"), ID, series_csv("n,output", &run.trace.outputs));
        summary.push(json!({
            "s1": s1,
            "early_peak": run.early_peak,
            "late_peak": run.late_peak,
            "decays": run.late_peak < 0.5 * run.early_peak,
            "period": run.period,
        }));
    }
    out.add("oscillator_summary.json", ID, pretty(&summary)?);
    Ok(out)
}

fn period8_demo(seed: u64) -> Result<DemoOutput> {
    const ID: &str = "period-noise-rejection";
    let (data, net, report) = period8_map()?;
    let hold = period8_run(100 * PERIOD8.len(), false, seed)?;
    let noisy = period8_run(200, true, seed)?;
    let mut out = DemoOutput::default();
    out.add("period8_training.csv", ID, data.to_csv());
    out.add("period8_model.json", ID, net.to_json()? + "\n");
    out.add("period8_report.json", ID, report.to_json()? + "\n");
    out.add("period8_hold_trace.csv", ID, series_csv("n,output", &hold.trace.outputs));
    out.add("period8_noise_trace.csv", ID, noisy.trace.to_csv());
    out.add("period8_noise_events.json", ID, noisy.trace.events_json()? + "\n");
    out.add("period8_noise_distance.csv", ID, series_csv("n,distance", &noisy.distance));
    let slopes: Vec<f64> = data.x().iter().map(|&x| net.eval_derivative(x, 1)).collect::<Result<_>>()?;
    out.add(
        "period8_summary.json",
        ID,
        pretty(&json!({
            "hold_max_deviation": peak(&hold.distance),
            "slopes_at_data": slopes,
            "noise_window": [PERIOD8_NOISE.0, PERIOD8_NOISE.1],
            "snr_db": PERIOD8_SNR_DB,
            "recovery": noisy.recovery,
        }))?,
    );
    Ok(out)
}

fn perturb_demo(seed: u64) -> Result<DemoOutput> {
    const ID: &str = "perturbation-dichotomy";
    let (b1, b2) = PERTURB_FILTER;
    let margin = stability_margin(PERTURB_DELAY, b1, b2, 1e-10)?;
    let mut out = DemoOutput::default();
    out.add("perturb_margin.json", "stability-margin", pretty(&margin)?);

    let sweep: Vec<(f64, f64)> = linspace(-3.0, 3.0, 601)
        .into_iter()
        .map(|d| Ok((d, max_root_magnitude(PERTURB_DELAY, b1, b2, d)?)))
        .collect::<Result<_>>()?;
    out.add("perturb_root_magnitude.csv", "stability-margin", pairs_csv("d,max_root_magnitude", sweep));

    let mut summary = Vec::new();
    for (label, d) in [("below", 1.0), ("at", margin.d_star), ("above", 1.8)] {
        let run = perturb_run(d, seed)?;
        out.add(format!("perturb_{label}_model.json"), ID, run.network.to_json()? + "\n");
        out.add(format!("perturb_{label}_trace.csv"), ID, run.trace.to_csv());
        out.add(format!("perturb_{label}_events.json"), ID, run.trace.events_json()? + "\n");
        out.add(format!("perturb_{label}_distance.csv"), ID, series_csv("n,distance", &run.distance));
        summary.push(json!({
            "label": label,
            "d": d,
            "max_root_magnitude": max_root_magnitude(PERTURB_DELAY, b1, b2, d)?,
            "recovery": run.recovery,
        }));
    }
    out.add("perturb_summary.json", ID, pretty(&summary)?);
    Ok(out)
}
