//! Linear analysis of the loop `G(z) = z^-L (b1 + b2 z^-1)` closed through a
//! map of slope `d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{poly_roots, ComplexRoot, Matrix};

/// `G(e^{jw})` as `(re, im)`.
pub fn open_loop_response(b1: f64, b2: f64, delay: usize, omega: f64) -> (f64, f64) {
    let l = delay as f64;
    let re = b1 * (omega * l).cos() + b2 * (omega * (l + 1.0)).cos();
    let im = -b1 * (omega * l).sin() - b2 * (omega * (l + 1.0)).sin();
    (re, im)
}

/// Default frequency grid density.
pub fn default_grid_size(delay: usize) -> usize {
    64 * (delay + 1)
}

/// Magnitude `q` of the leftmost crossing `-q + j0` of the Nyquist locus of
/// `G` over `w` in `[0, pi]`.
///
/// Crossings are bracketed on a uniform grid of `grid_size` points and
/// bisected down to `refine_tolerance` in `w`.
pub fn nyquist_q(b1: f64, b2: f64, delay: usize, grid_size: usize, refine_tolerance: f64) -> Result<f64> {
    if delay == 0 {
        return Err(Error::invalid("delay length must be at least 1"));
    }
    if grid_size < 4 * (delay + 1) {
        return Err(Error::invalid(format!(
            "grid of {grid_size} points cannot resolve a delay of {delay} (need >= {})",
            4 * (delay + 1)
        )));
    }
    if !(refine_tolerance > 0.0) {
        return Err(Error::invalid("refine tolerance must be positive"));
    }
    let pi = std::f64::consts::PI;
    let im = |w: f64| open_loop_response(b1, b2, delay, w).1;
    let re = |w: f64| open_loop_response(b1, b2, delay, w).0;

    let mut crossings = Vec::new();
    // Both ends of [0, pi] lie on the real axis exactly.
    crossings.push(b1 + b2);
    crossings.push(if delay.is_multiple_of(2) { b1 - b2 } else { b2 - b1 });

    let step = pi / (grid_size - 1) as f64;
    let mut prev_w = 0.0;
    let mut prev_im = 0.0;
    for i in 1..grid_size - 1 {
        let w = i as f64 * step;
        let v = im(w);
        if i > 1 && prev_im != 0.0 && v != 0.0 && (prev_im < 0.0) != (v < 0.0) {
            let (mut lo, mut hi, mut f_lo) = (prev_w, w, prev_im);
            while hi - lo > refine_tolerance {
                let mid = 0.5 * (lo + hi);
                let f_mid = im(mid);
                if f_mid == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (f_mid < 0.0) == (f_lo < 0.0) {
                    lo = mid;
                    f_lo = f_mid;
                } else {
                    hi = mid;
                }
            }
            crossings.push(re(0.5 * (lo + hi)));
        } else if v == 0.0 {
            crossings.push(re(w));
        }
        prev_w = w;
        prev_im = v;
    }
    crossings.into_iter().filter(|&r| r < 0.0).map(f64::abs).reduce(f64::max).ok_or(Error::NoNyquistCrossing)
}

/// Slope the map must exceed (in the negative direction) at the origin for
/// oscillation to start: `-1/q`.
pub fn oscillation_slope_bound(q: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::invalid(format!("q must be positive, got {q}")));
    }
    Ok(-1.0 / q)
}

/// `[1, 0, ..., 0, -b1 d, -b2 d]`, the characteristic polynomial
/// `z^(L+1) - b1 d z - b2 d` of the state transition Jacobian.
pub fn jacobian_char_poly(delay: usize, b1: f64, b2: f64, d: f64) -> Result<Vec<f64>> {
    if delay == 0 {
        return Err(Error::invalid("delay length must be at least 1"));
    }
    let mut c = vec![0.0; delay + 2];
    c[0] = 1.0;
    c[delay] = -b1 * d;
    c[delay + 1] = -b2 * d;
    Ok(c)
}

/// Jacobian of the state transition at a point where the map has slope `d`.
pub fn jacobian_matrix(delay: usize, b1: f64, b2: f64, d: f64) -> Result<Matrix> {
    if delay == 0 {
        return Err(Error::invalid("delay length must be at least 1"));
    }
    let mut j = Matrix::zeros(delay + 1, delay + 1);
    j[(0, delay)] = d;
    j[(1, 0)] = b2;
    j[(1, delay)] += b1 * d;
    for k in 2..=delay {
        j[(k, k - 1)] = 1.0;
    }
    Ok(j)
}

pub fn jacobian_eigenvalues(delay: usize, b1: f64, b2: f64, d: f64) -> Result<Vec<ComplexRoot>> {
    poly_roots(&jacobian_char_poly(delay, b1, b2, d)?)
}

pub fn max_root_magnitude(delay: usize, b1: f64, b2: f64, d: f64) -> Result<f64> {
    Ok(jacobian_eigenvalues(delay, b1, b2, d)?.iter().map(ComplexRoot::norm).fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityMargin {
    /// The binding slope magnitude: the smaller of the two sides.
    pub d_star: f64,
    /// Smallest `d > 0` where the spectral radius reaches 1.
    pub positive: Option<f64>,
    /// Smallest `|d|`, `d < 0`, where the spectral radius reaches 1.
    pub negative: Option<f64>,
    /// Spectral radius was non-decreasing in `|d|` up to each crossing found.
    pub monotone: bool,
    /// Both sides found and they differ by more than the tolerance.
    pub asymmetric: bool,
}

const MARGIN_SCAN: usize = 400;

/// Slope magnitude at which the largest Jacobian eigenvalue reaches the unit
/// circle, searched on `[0, 10 / (|b1| + |b2|)]` for both signs of `d`.
pub fn stability_margin(delay: usize, b1: f64, b2: f64, tolerance: f64) -> Result<StabilityMargin> {
    if b1 == 0.0 && b2 == 0.0 {
        return Err(Error::invalid("filter coefficients cannot both be zero"));
    }
    if !(tolerance > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let d_hi = 10.0 / (b1.abs() + b2.abs());
    let (positive, mono_pos) = margin_one_side(delay, b1, b2, d_hi, 1.0, tolerance)?;
    let (negative, mono_neg) = margin_one_side(delay, b1, b2, d_hi, -1.0, tolerance)?;
    let d_star = match (positive, negative) {
        (Some(p), Some(n)) => p.min(n),
        (Some(p), None) => p,
        (None, Some(n)) => n,
        (None, None) => return Err(Error::NoStabilityCrossing { d_hi }),
    };
    let asymmetric = matches!((positive, negative), (Some(p), Some(n)) if (p - n).abs() > tolerance);
    Ok(StabilityMargin { d_star, positive, negative, monotone: mono_pos && mono_neg, asymmetric })
}

fn margin_one_side(delay: usize, b1: f64, b2: f64, d_hi: f64, sign: f64, tol: f64) -> Result<(Option<f64>, bool)> {
    let g = |a: f64| max_root_magnitude(delay, b1, b2, sign * a).map(|r| r - 1.0);
    let mut prev_a = 0.0;
    let mut prev_g = g(0.0)?;
    let mut monotone = true;
    for i in 1..=MARGIN_SCAN {
        let a = d_hi * i as f64 / MARGIN_SCAN as f64;
        let ga = g(a)?;
        if ga < prev_g - 1e-9 {
            monotone = false;
        }
        if ga >= 0.0 {
            let (mut lo, mut hi) = (prev_a, a);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if g(mid)? >= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok((Some(0.5 * (lo + hi)), monotone));
        }
        prev_a = a;
        prev_g = ga;
    }
    Ok((None, monotone))
}

/// JSON analysis report; fields not computed by a mode are `null`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub q: Option<f64>,
    pub slope_bound: Option<f64>,
    pub d_star: Option<f64>,
    pub roots: Option<Vec<ComplexRoot>>,
}
