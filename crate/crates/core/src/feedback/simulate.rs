use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::system::{FeedbackSystem, FirFilter, LoopState, ScalarMap};
use crate::error::{Error, Result};
use crate::numerics::seeded_rng;

/// Gaussian noise added to the map input on samples `start..=end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseWindow {
    pub start: usize,
    pub end: usize,
    pub snr_db: f64,
    pub seed: u64,
    /// RMS of the reference (target) signal the SNR is measured against.
    pub reference_rms: f64,
}

impl NoiseWindow {
    pub fn std_dev(&self) -> Result<f64> {
        if !(self.reference_rms > 0.0) {
            return Err(Error::ZeroReferencePower);
        }
        Ok(self.reference_rms * 10f64.powf(-self.snr_db / 20.0))
    }
}

/// Filter coefficients replaced by `b_i + delta_i`, `|delta_i| <= bound`,
/// drawn afresh on each sample `start..=end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientPerturbation {
    pub start: usize,
    pub end: usize,
    pub bound: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceSchedule {
    pub noise: Option<NoiseWindow>,
    pub coeff_perturb: Option<CoefficientPerturbation>,
}

impl DisturbanceSchedule {
    pub fn none() -> Self {
        Self::default()
    }

    fn validate(&self) -> Result<()> {
        if let Some(n) = &self.noise {
            if n.start > n.end {
                return Err(Error::invalid("noise window start after end"));
            }
            n.std_dev()?;
        }
        if let Some(p) = &self.coeff_perturb {
            if p.start > p.end {
                return Err(Error::invalid("perturbation window start after end"));
            }
            if !(p.bound >= 0.0) {
                return Err(Error::invalid("perturbation bound must be nonnegative"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DisturbanceEvent {
    Noise { n: usize, value: f64 },
    Coefficients { n: usize, b1: f64, b2: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    /// Map output at each step.
    pub outputs: Vec<f64>,
    /// State before each step, when recorded.
    pub states: Option<Vec<Vec<f64>>>,
    pub events: Vec<DisturbanceEvent>,
}

impl SimulationTrace {
    /// `n,output[,x0..xL]` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,output");
        if let Some(first) = self.states.as_ref().and_then(|s| s.first()) {
            for k in 0..first.len() {
                out.push_str(&format!(",x{k}"));
            }
        }
        out.push('\n');
        for (n, y) in self.outputs.iter().enumerate() {
            out.push_str(&format!("{n},{y}"));
            if let Some(states) = &self.states {
                for v in &states[n] {
                    out.push_str(&format!(",{v}"));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn events_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.events)?)
    }
}

pub fn simulate<M: ScalarMap>(
    sys: &FeedbackSystem<M>,
    init: &LoopState,
    n_steps: usize,
    dist: &DisturbanceSchedule,
) -> Result<SimulationTrace> {
    simulate_recording(sys, init, n_steps, dist, false)
}

/// Iterates the loop for `n_steps`, applying the disturbance schedule.
/// Sample `n` is the output of the `n`-th step, counting from 0.
pub fn simulate_recording<M: ScalarMap>(
    sys: &FeedbackSystem<M>,
    init: &LoopState,
    n_steps: usize,
    dist: &DisturbanceSchedule,
    record_states: bool,
) -> Result<SimulationTrace> {
    if n_steps == 0 {
        return Err(Error::invalid("simulation needs at least one step"));
    }
    sys.check_state(init)?;
    dist.validate()?;
    if dist.coeff_perturb.is_some() && sys.filter().is_none() {
        return Err(Error::invalid("coefficient perturbation needs a filter in the loop"));
    }

    let mut noise = match &dist.noise {
        Some(w) => {
            let normal = Normal::new(0.0, w.std_dev()?).map_err(|e| Error::invalid(e.to_string()))?;
            Some((w, normal, seeded_rng(w.seed)))
        }
        None => None,
    };
    let mut perturb = dist.coeff_perturb.as_ref().map(|p| (p, seeded_rng(p.seed)));

    let base = sys.taps();
    let mut state = init.clone();
    let mut outputs = Vec::with_capacity(n_steps);
    let mut states = record_states.then(|| Vec::with_capacity(n_steps));
    let mut events = Vec::new();

    for n in 0..n_steps {
        if let Some(s) = states.as_mut() {
            s.push(state.as_slice().to_vec());
        }
        let mut taps = base;
        if let Some((p, rng)) = perturb.as_mut() {
            if (p.start..=p.end).contains(&n) {
                let (d1, d2) = if p.bound > 0.0 {
                    (rng.random_range(-p.bound..=p.bound), rng.random_range(-p.bound..=p.bound))
                } else {
                    (0.0, 0.0)
                };
                taps = FirFilter { b1: base.b1 + d1, b2: base.b2 + d2 };
                events.push(DisturbanceEvent::Coefficients { n, b1: taps.b1, b2: taps.b2 });
            }
        }
        let mut input_noise = 0.0;
        if let Some((w, normal, rng)) = noise.as_mut() {
            if (w.start..=w.end).contains(&n) {
                input_noise = normal.sample(rng);
                events.push(DisturbanceEvent::Noise { n, value: input_noise });
            }
        }
        outputs.push(sys.advance(&mut state, taps, input_noise));
    }
    Ok(SimulationTrace { outputs, states, events })
}

/// RMS over one period of a periodic signal.
pub fn rms(signal: &[f64]) -> f64 {
    if signal.is_empty() {
        return 0.0;
    }
    (signal.iter().map(|v| v * v).sum::<f64>() / signal.len() as f64).sqrt()
}

/// `|output(n) - target(n)|` for the `2L` orbit whose sample `n` is
/// `period[(L + n) mod 2L]` (the convention of the half-period and
/// on-orbit initializations). Non-finite outputs give infinite distance.
pub fn distance_to_orbit(outputs: &[f64], period: &[f64]) -> Vec<f64> {
    let n2 = period.len();
    let l = n2 / 2;
    outputs
        .iter()
        .enumerate()
        .map(|(n, y)| {
            let d = (y - period[(l + n) % n2]).abs();
            if d.is_finite() {
                d
            } else {
                f64::INFINITY
            }
        })
        .collect()
}

/// Outcome of a disturbance-rejection measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recovery {
    /// Largest distance over the window preceding the disturbance.
    pub floor: f64,
    /// First sample after the disturbance from which a full window stays at
    /// or below `floor + slack`.
    pub recovered_at: Option<usize>,
    pub peak: f64,
}

/// Absolute slack added to the pre-event floor when deciding recovery.
pub const RECOVERY_SLACK: f64 = 1e-9;

/// Looks for the return of `distance` to its pre-event level after a
/// disturbance on `start..=end`, using windows of `window` samples.
pub fn measure_recovery(distance: &[f64], start: usize, end: usize, window: usize) -> Result<Recovery> {
    if window == 0 || start < window || end + window >= distance.len() || start > end {
        return Err(Error::invalid("trace too short around the disturbance window"));
    }
    let max_of = |s: &[f64]| s.iter().copied().fold(0.0f64, |a, b| if b.is_nan() { f64::INFINITY } else { a.max(b) });
    let floor = max_of(&distance[start - window..start]);
    let threshold = floor + RECOVERY_SLACK;
    let peak = max_of(&distance[start..]);
    let recovered_at = (end + 1..=distance.len() - window).find(|&n| max_of(&distance[n..n + window]) <= threshold);
    Ok(Recovery { floor, recovered_at, peak })
}

#[cfg(test)]
mod tests {
    use super::super::system::LinearMap;
    use super::*;

    #[test]
    fn no_disturbance_matches_repeated_step() {
        let sys = FeedbackSystem::new(2, Some(FirFilter::new(0.4, 0.3).unwrap()), LinearMap(-1.1)).unwrap();
        let init = LoopState::new(vec![0.2, -0.5, 0.9]).unwrap();
        let trace = simulate(&sys, &init, 30, &DisturbanceSchedule::none()).unwrap();
        let mut s = init;
        for y in &trace.outputs {
            let (next, out) = sys.step(&s).unwrap();
            assert_eq!(out, *y);
            s = next;
        }
        assert!(trace.events.is_empty());
    }

    #[test]
    fn zero_reference_power_rejected() {
        let sys = FeedbackSystem::new(1, None, LinearMap(0.5)).unwrap();
        let dist = DisturbanceSchedule {
            noise: Some(NoiseWindow { start: 0, end: 1, snr_db: 40.0, seed: 0, reference_rms: 0.0 }),
            coeff_perturb: None,
        };
        assert!(matches!(simulate(&sys, &LoopState::zeros(1), 5, &dist), Err(Error::ZeroReferencePower)));
    }

    #[test]
    fn perturbation_is_bounded_and_restored() {
        let sys = FeedbackSystem::new(3, Some(FirFilter::new(0.1, 0.5).unwrap()), LinearMap(1.0)).unwrap();
        let dist = DisturbanceSchedule {
            noise: None,
            coeff_perturb: Some(CoefficientPerturbation { start: 4, end: 8, bound: 0.02, seed: 7 }),
        };
        let init = LoopState::new(vec![0.0, 1.0, 1.0, 1.0]).unwrap();
        let trace = simulate(&sys, &init, 20, &dist).unwrap();
        assert_eq!(trace.events.len(), 5);
        for e in &trace.events {
            match *e {
                DisturbanceEvent::Coefficients { n, b1, b2 } => {
                    assert!((4..=8).contains(&n));
                    assert!((b1 - 0.1).abs() <= 0.02 && (b2 - 0.5).abs() <= 0.02);
                }
                _ => panic!("unexpected event"),
            }
        }
        assert_eq!(trace, simulate(&sys, &init, 20, &dist).unwrap());
        let filterless = FeedbackSystem::new(3, None, LinearMap(1.0)).unwrap();
        assert!(simulate(&filterless, &init, 20, &dist).is_err());
    }

    #[test]
    fn noise_level_follows_snr() {
        let w = NoiseWindow { start: 0, end: 0, snr_db: 20.0, seed: 0, reference_rms: 2.0 };
        assert!((w.std_dev().unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn trace_csv_layout() {
        let sys = FeedbackSystem::new(1, None, LinearMap(-1.0)).unwrap();
        let init = LoopState::from_delay_line(&[1.0]).unwrap();
        let trace = simulate_recording(&sys, &init, 2, &DisturbanceSchedule::none(), true).unwrap();
        assert_eq!(trace.to_csv(), "n,output,x0,x1\n0,-1,0,1\n1,1,-1,-1\n");
    }

    #[test]
    fn recovery_measurement() {
        let mut d = vec![0.0; 40];
        d[10] = 1.0;
        d[11] = 0.5;
        let r = measure_recovery(&d, 10, 11, 4).unwrap();
        assert_eq!(r.floor, 0.0);
        assert_eq!(r.recovered_at, Some(12));
        let mut stuck = vec![0.0; 40];
        stuck[10..].iter_mut().for_each(|v| *v = f64::INFINITY);
        assert_eq!(measure_recovery(&stuck, 10, 11, 4).unwrap().recovered_at, None);
    }
}
