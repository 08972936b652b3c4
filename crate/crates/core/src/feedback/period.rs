//! Training sets that turn a desired periodic signal, or a set of fixed
//! points, into a map for the feedback loop.

use serde::{Deserialize, Serialize};

use super::system::FirFilter;
use crate::error::{Error, Result};
use crate::numerics::circ_conv;
use crate::trainer::TrainingSet;

/// How the loop filter is folded into the map inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvolutionMode {
    /// Each half of the period is convolved with the filter on its own
    /// `L`-sample circle.
    #[default]
    PerHalf,
    /// The whole period is convolved on its `2L`-sample circle. The inputs are
    /// then exactly what the map sees when the loop runs on the orbit.
    FullPeriod,
}

/// Sign given to the derivative targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeSign {
    /// Sign of the secant through the neighbouring training points (sorted by input).
    #[default]
    Secant,
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PeriodOptions {
    pub convolution: ConvolutionMode,
    pub slope_sign: SlopeSign,
}

/// Pairs mapping each half of `period` (length `2L`) onto the other, with
/// first-derivative targets of magnitude `derivative_magnitude`.
pub fn build_period_training_set(
    period: &[f64],
    filter: Option<FirFilter>,
    derivative_magnitude: f64,
) -> Result<TrainingSet> {
    build_period_training_set_with(period, filter, derivative_magnitude, PeriodOptions::default())
}

pub fn build_period_training_set_with(
    period: &[f64],
    filter: Option<FirFilter>,
    derivative_magnitude: f64,
    options: PeriodOptions,
) -> Result<TrainingSet> {
    if period.len() < 2 || !period.len().is_multiple_of(2) {
        return Err(Error::invalid("period length must be even and at least 2"));
    }
    if period.iter().any(|v| !v.is_finite()) || !derivative_magnitude.is_finite() {
        return Err(Error::invalid("period and derivative magnitude must be finite"));
    }
    let n2 = period.len();
    let l = n2 / 2;
    let (first, second) = period.split_at(l);

    let pairs: Vec<(f64, f64)> = match (filter, options.convolution) {
        (None, _) => (0..n2).map(|j| (period[j], period[(j + l) % n2])).collect(),
        (Some(h), ConvolutionMode::PerHalf) => {
            let a = circ_conv(h.kernel(), first);
            let b = circ_conv(h.kernel(), second);
            a.into_iter().zip(second.iter().copied()).chain(b.into_iter().zip(first.iter().copied())).collect()
        }
        (Some(h), ConvolutionMode::FullPeriod) => {
            circ_conv(h.kernel(), period).into_iter().enumerate().map(|(j, u)| (u, period[(j + l) % n2])).collect()
        }
    };

    let points = merge_pairs(pairs)?;
    let x: Vec<f64> = points.iter().map(|p| p.0).collect();
    let t: Vec<f64> = points.iter().map(|p| p.1).collect();
    let slopes = (0..x.len())
        .map(|i| {
            let sign = match options.slope_sign {
                SlopeSign::Positive => 1.0,
                SlopeSign::Negative => -1.0,
                SlopeSign::Secant => secant_sign(&x, &t, i),
            };
            sign * derivative_magnitude.abs()
        })
        .collect();
    TrainingSet::new(x, vec![t, slopes])
}

/// Sorts by input and merges exact repeats; two targets for one input make
/// the map multi-valued.
fn merge_pairs(mut pairs: Vec<(f64, f64)>) -> Result<Vec<(f64, f64)>> {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
    for (x, y) in pairs {
        match out.last() {
            Some(&(px, py)) if px == x => {
                if py != y {
                    return Err(Error::NotSingleValued { input: x, first: py, second: y });
                }
            }
            _ => out.push((x, y)),
        }
    }
    Ok(out)
}

fn secant_sign(x: &[f64], t: &[f64], i: usize) -> f64 {
    if x.len() < 2 {
        return 1.0;
    }
    let lo = i.saturating_sub(1);
    let hi = (i + 1).min(x.len() - 1);
    if (t[hi] - t[lo]) / (x[hi] - x[lo]) < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Fixed points `(x, y)` of a map with slope `s1` at the one sitting on the
/// origin and `s2` at all others, sorted by `x`.
pub fn build_oscillator_map_spec(s1: f64, s2: f64, fixed_points: &[(f64, f64)]) -> Result<TrainingSet> {
    let mut pts = fixed_points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(w) = pts.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::invalid(format!("duplicate abscissa {}", w[0].0)));
    }
    let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let t: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let d: Vec<f64> = pts.iter().map(|p| if p.0 == 0.0 { s1 } else { s2 }).collect();
    TrainingSet::new(x, vec![t, d])
}

/// The three fixed points of the startup oscillator: the origin and `(∓a, ±a)`.
pub fn oscillator_fixed_points(a: f64) -> Vec<(f64, f64)> {
    vec![(-a, a), (0.0, 0.0), (a, -a)]
}
