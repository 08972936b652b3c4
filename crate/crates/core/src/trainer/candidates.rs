use serde::{Deserialize, Serialize};

use super::TrainingSet;
use crate::error::{Error, Result};
use crate::model::{basis_value, BasisKind};
use crate::numerics::linspace;

/// How the candidate center set is formed from the training inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CandidateMode {
    /// Centers only at the data inputs.
    DataOnly,
    /// Data inputs plus `count` evenly spaced points over the (margin-widened) data range.
    UniformAugment { count: usize },
    /// Data inputs plus the given points.
    Explicit { points: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateGrid {
    pub mode: CandidateMode,
    /// Augmentation points may extend this far beyond the data range.
    pub margin: f64,
}

impl CandidateGrid {
    pub fn data_only() -> Self {
        Self { mode: CandidateMode::DataOnly, margin: 0.0 }
    }

    pub fn uniform(count: usize) -> Self {
        Self { mode: CandidateMode::UniformAugment { count }, margin: 0.0 }
    }

    pub fn explicit(points: Vec<f64>) -> Self {
        Self { mode: CandidateMode::Explicit { points }, margin: 0.0 }
    }

    /// Roughly `2N` candidates: `N + 2` grid points, whose two ends land on
    /// the data extremes.
    pub fn doubled(n: usize) -> Self {
        Self::uniform(n + 2)
    }
}

/// Sorted, deduplicated candidate centers.
pub fn build_candidates(ts: &TrainingSet, grid: &CandidateGrid) -> Result<Vec<f64>> {
    if !(grid.margin >= 0.0) || !grid.margin.is_finite() {
        return Err(Error::invalid("candidate margin must be a nonnegative number"));
    }
    let x = ts.x();
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min) - grid.margin;
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max) + grid.margin;
    let extra = match &grid.mode {
        CandidateMode::DataOnly => Vec::new(),
        CandidateMode::UniformAugment { count } => {
            if *count == 0 {
                return Err(Error::invalid("uniform augmentation needs a positive count"));
            }
            linspace(lo, hi, *count)
        }
        CandidateMode::Explicit { points } => {
            if let Some(p) = points.iter().find(|p| !(lo..=hi).contains(*p)) {
                return Err(Error::invalid(format!("candidate {p} outside [{lo}, {hi}] (raise the margin)")));
            }
            points.clone()
        }
    };
    let mut all: Vec<f64> = x.iter().copied().chain(extra).collect();
    all.sort_by(f64::total_cmp);
    let tol = 1e-12 * (hi - lo).max(1.0);
    all.dedup_by(|b, a| (*b - *a).abs() <= tol);
    Ok(all)
}

/// `[d^order phi(x_k, center)]_k` over the training inputs.
pub fn build_regressor(center: f64, x: &[f64], order: usize, basis: BasisKind) -> Result<Vec<f64>> {
    basis.check_order(order)?;
    x.iter().map(|&xk| basis_value(basis, xk, center, order)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(x: &[f64]) -> TrainingSet {
        TrainingSet::from_values(x.to_vec(), vec![0.0; x.len()]).unwrap()
    }

    #[test]
    fn candidate_modes() {
        assert_eq!(build_candidates(&ts(&[0.0, 1.0, 2.0]), &CandidateGrid::data_only()).unwrap(), vec![0.0, 1.0, 2.0]);
        assert_eq!(build_candidates(&ts(&[0.0, 2.0]), &CandidateGrid::uniform(3)).unwrap(), vec![0.0, 1.0, 2.0]);
        assert_eq!(
            build_candidates(&ts(&[0.0, 1.0]), &CandidateGrid::explicit(vec![0.5])).unwrap(),
            vec![0.0, 0.5, 1.0]
        );
    }

    #[test]
    fn explicit_points_respect_margin() {
        let set = ts(&[0.0, 1.0]);
        assert!(build_candidates(&set, &CandidateGrid::explicit(vec![1.5])).is_err());
        let grid = CandidateGrid { margin: 0.5, ..CandidateGrid::explicit(vec![1.5]) };
        assert_eq!(build_candidates(&set, &grid).unwrap(), vec![0.0, 1.0, 1.5]);
    }

    #[test]
    fn data_order_is_irrelevant() {
        assert_eq!(build_candidates(&ts(&[2.0, 0.0, 1.0]), &CandidateGrid::data_only()).unwrap(), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn regressors() {
        assert_eq!(build_regressor(0.0, &[1.0, 2.0], 0, BasisKind::Cubic).unwrap(), vec![1.0, 8.0]);
        assert_eq!(build_regressor(0.0, &[1.0, 2.0], 1, BasisKind::Cubic).unwrap(), vec![3.0, 12.0]);
        assert!(build_regressor(0.0, &[1.0], 3, BasisKind::Cubic).is_err());
    }
}
