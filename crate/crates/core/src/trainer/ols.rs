use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::candidates::{build_candidates, build_regressor, CandidateGrid};
use super::TrainingSet;
use crate::error::{Error, Result};
use crate::model::{BasisKind, RbfNetwork};
use crate::numerics::{default_rank_tolerance, dot, lstsq, norm, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainerConfig {
    /// Channel weights (map, first derivative, ...). Must sum to one.
    pub lambda: Vec<f64>,
    /// Unit budget; `None` allows every candidate.
    pub max_units: Option<usize>,
    /// Stop once `sqrt(sum_d lambda_d * rms_d^2)` is at or below this.
    pub error_tolerance: f64,
    pub candidate_grid: CandidateGrid,
    /// Relative singular value cutoff for the output-layer solve; `None`
    /// uses `eps * max(rows, cols)` of the stacked matrix.
    pub rank_tolerance: Option<f64>,
    /// Squared norm (relative to the raw regressor's) below which an
    /// orthogonalized regressor is considered degenerate.
    pub min_regressor_norm: f64,
    /// What to do once the per-order selection has nothing left to offer.
    pub saturation: Saturation,
}

/// Behaviour once every remaining candidate is degenerate in every weighted
/// channel while the residual is still above tolerance.
///
/// Each channel lives in `R^N`, so the per-order sets fill up after about
/// `N` units even though the stacked system with `(r + 1) N` rows can take
/// more.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Saturation {
    /// Report `CandidatesExhausted`.
    Stop,
    /// Keep selecting by classic OLS on the stacked, `sqrt(lambda)`-weighted
    /// regressors `[p; p'; ...]`, orthogonalized against the stacked bias
    /// column and every unit selected so far.
    #[default]
    Joint,
}

impl TrainerConfig {
    /// Equal channel weights and about twice as many candidates as data points.
    pub fn for_training_set(ts: &TrainingSet) -> Self {
        let channels = ts.order() + 1;
        Self {
            lambda: vec![1.0 / channels as f64; channels],
            max_units: None,
            error_tolerance: 1e-9,
            candidate_grid: CandidateGrid::doubled(ts.len()),
            rank_tolerance: None,
            min_regressor_norm: 1e-14,
            saturation: Saturation::Joint,
        }
    }

    pub fn with_lambda(mut self, lambda: Vec<f64>) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_grid(mut self, grid: CandidateGrid) -> Self {
        self.candidate_grid = grid;
        self
    }

    pub fn with_max_units(mut self, max_units: usize) -> Self {
        self.max_units = Some(max_units);
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.error_tolerance = tol;
        self
    }

    pub fn with_saturation(mut self, saturation: Saturation) -> Self {
        self.saturation = saturation;
        self
    }

    fn validate(&self, channels: usize) -> Result<()> {
        if self.lambda.len() != channels {
            return Err(Error::invalid(format!(
                "{} lambda weights given but the data has {} channels",
                self.lambda.len(),
                channels
            )));
        }
        if self.lambda.iter().any(|l| !(*l >= 0.0)) {
            return Err(Error::invalid("lambda weights must be nonnegative"));
        }
        let sum: f64 = self.lambda.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("lambda weights sum to {sum}, expected 1")));
        }
        if !(self.error_tolerance >= 0.0) {
            return Err(Error::invalid("error tolerance must be nonnegative"));
        }
        if self.rank_tolerance.is_some_and(|t| !(t > 0.0)) || !(self.min_regressor_norm > 0.0) {
            return Err(Error::invalid("rank tolerance and regressor norm floor must be positive"));
        }
        if self.max_units == Some(0) {
            return Err(Error::invalid("max_units must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    ToleranceMet,
    BudgetExhausted,
    CandidatesExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// Index into the sorted candidate list.
    pub chosen_index: usize,
    pub center: f64,
    /// Error reduction ratio of the chosen regressor, per derivative order.
    pub err: Vec<f64>,
    pub tot_err: f64,
    /// Per-order RMS residual of the network with the units selected so far.
    pub rms: Vec<f64>,
    pub combined_rms_error_after_solve: f64,
    /// Chosen by the stacked criterion after the per-order sets saturated;
    /// `tot_err` is then the stacked ratio and `err` is all zeros.
    #[serde(default)]
    pub joint: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub candidate_count: usize,
    pub selected_centers: Vec<f64>,
    pub per_iteration: Vec<IterationRecord>,
    pub stopped_reason: StopReason,
}

impl TrainReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn final_rms(&self) -> Option<f64> {
        self.per_iteration.last().map(|r| r.combined_rms_error_after_solve)
    }
}

/// Everything produced by a training run, including the per-order sets of
/// orthogonalized selected regressors.
#[derive(Debug, Clone)]
pub struct TrainRun {
    pub network: RbfNetwork,
    pub report: TrainReport,
    pub orthogonal_sets: Vec<Vec<Vec<f64>>>,
}

/// `v` minus its projections onto each (mutually orthogonal) basis vector.
///
/// Projections are taken from the running remainder, one vector at a time.
pub fn orthogonalize(v: &[f64], basis_set: &[Vec<f64>]) -> Vec<f64> {
    let mut r = v.to_vec();
    for u in basis_set {
        let uu = dot(u, u);
        if uu == 0.0 {
            continue;
        }
        let c = dot(u, &r) / uu;
        r.iter_mut().zip(u).for_each(|(ri, ui)| *ri -= c * ui);
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReduction {
    pub ratio: f64,
    /// The regressor's squared norm fell to or below the floor.
    pub degenerate: bool,
    /// Squared norm of the orthogonalized regressor: the fraction of a unit
    /// regressor left after removing the span already selected.
    pub remaining: f64,
}

/// `(u.t)^2 / ((u.u)(t.t))`, zero for degenerate `u` or zero-energy `t`.
pub fn error_reduction_ratio(u: &[f64], t: &[f64], min_regressor_norm: f64) -> ErrorReduction {
    let uu = dot(u, u);
    if !(uu > min_regressor_norm) {
        return ErrorReduction { ratio: 0.0, degenerate: true, remaining: uu };
    }
    let tt = dot(t, t);
    if tt == 0.0 {
        return ErrorReduction { ratio: 0.0, degenerate: false, remaining: uu };
    }
    let ut = dot(u, t);
    ErrorReduction { ratio: (ut * ut / (uu * tt)).clamp(0.0, 1.0), degenerate: false, remaining: uu }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub tot_err: f64,
    pub per_order: Vec<ErrorReduction>,
}

/// Scores one candidate's per-order orthogonalized regressors.
/// Returns `None` when every channel carrying weight is degenerate.
fn score(orth: &[Vec<f64>], targets: &[Vec<f64>], lambda: &[f64], min_norm: f64) -> Option<(f64, Vec<ErrorReduction>)> {
    let per_order: Vec<ErrorReduction> =
        orth.iter().zip(targets).map(|(u, t)| error_reduction_ratio(u, t, min_norm)).collect();
    let usable = per_order.iter().zip(lambda).any(|(e, &l)| l > 0.0 && !e.degenerate);
    if !usable {
        return None;
    }
    let tot = per_order.iter().zip(lambda).map(|(e, l)| l * e.ratio).sum();
    Some((tot, per_order))
}

/// Weighted score and per-order reductions of one candidate.
type Scored = (f64, Vec<ErrorReduction>);

/// Picks the candidate with the largest weighted error reduction ratio.
///
/// `candidate_orth[i]` is `None` for candidates no longer available. Ties go
/// to the lowest index. Returns the selection (if any) and the indices found
/// degenerate in this pass.
pub fn select_next(
    candidate_orth: &[Option<Vec<Vec<f64>>>],
    targets: &[Vec<f64>],
    lambda: &[f64],
    min_regressor_norm: f64,
) -> (Option<Selection>, Vec<usize>) {
    // outer None: unavailable; inner None: degenerate
    let scores: Vec<Option<Option<Scored>>> = candidate_orth
        .par_iter()
        .map(|c| c.as_ref().map(|orth| score(orth, targets, lambda, min_regressor_norm)))
        .collect();
    let mut degenerate = Vec::new();
    let mut live = Vec::new();
    for (index, s) in scores.into_iter().enumerate() {
        match s {
            None => {}
            Some(None) => degenerate.push(index),
            Some(Some((tot_err, per_order))) => live.push(Selection { index, tot_err, per_order }),
        }
    }
    let keyed: Vec<(f64, f64)> = live
        .iter()
        .map(|s| {
            let remaining = s
                .per_order
                .iter()
                .zip(lambda)
                .filter(|(e, &l)| l > 0.0 && !e.degenerate)
                .map(|(e, _)| e.remaining)
                .fold(f64::INFINITY, f64::min);
            (s.tot_err, remaining)
        })
        .collect();
    let best = tie_break(&keyed).map(|k| live.swap_remove(k));
    (best, degenerate)
}

/// Scores closer than this relative gap count as tied, on top of their
/// rounding uncertainty.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Relative rounding uncertainty of a ratio whose regressor kept only
/// `remaining` of its unit norm squared: cancellation during
/// orthogonalization costs about `eps / remaining`.
fn score_uncertainty(remaining: f64) -> f64 {
    TIE_TOLERANCE + 64.0 * f64::EPSILON / remaining
}

/// Position of the first `(score, remaining)` entry that could be the best
/// one given the rounding uncertainty of every score.
///
/// The cubic basis produces exact ties: two centers with no data point
/// between them differ by a piecewise cubic that earlier units may already
/// span. Rounding would decide the winner unless scores that agree within
/// their uncertainty are treated as equal, leaving the lowest index to win.
/// Each score stands for an interval; an entry qualifies when its upper end
/// reaches the largest lower end. The rule does not depend on which entry
/// happens to come out on top, so a nearly degenerate regressor with a wide
/// interval cannot shift the choice between two implementations.
fn tie_break(scores: &[(f64, f64)]) -> Option<usize> {
    let spread = |&(s, r): &(f64, f64)| s.abs() * score_uncertainty(r);
    let floor = scores.iter().map(|e| e.0 - spread(e)).reduce(f64::max)?;
    scores.iter().position(|e| e.0 + spread(e) >= floor)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputLayer {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// RMS residual per derivative order.
    pub rms: Vec<f64>,
}

/// Minimum-norm least-squares solve of the stacked system
///
/// ```text
/// [t    ]   [P0  1] [w]
/// [t(1) ] = [P1  0] [b]
/// [ ... ]   [ ... ]
/// ```
///
/// with one `N x h` regressor matrix per derivative order.
pub fn solve_output_layer(
    per_order: &[Matrix],
    targets: &[Vec<f64>],
    rank_tolerance: Option<f64>,
) -> Result<OutputLayer> {
    if per_order.len() != targets.len() || per_order.is_empty() {
        return Err(Error::invalid("one regressor matrix per target channel is required"));
    }
    let n = targets[0].len();
    let h = per_order[0].cols();
    if per_order.iter().any(|m| m.rows() != n || m.cols() != h) || targets.iter().any(|t| t.len() != n) {
        return Err(Error::invalid("regressor matrices and targets disagree in shape"));
    }
    let channels = per_order.len();
    let mut stacked = Matrix::zeros(channels * n, h + 1);
    let mut rhs = Vec::with_capacity(channels * n);
    for (d, (m, t)) in per_order.iter().zip(targets).enumerate() {
        for k in 0..n {
            let row = d * n + k;
            for j in 0..h {
                stacked[(row, j)] = m[(k, j)];
            }
            stacked[(row, h)] = if d == 0 { 1.0 } else { 0.0 };
        }
        rhs.extend_from_slice(t);
    }
    let tol = rank_tolerance.unwrap_or_else(|| default_rank_tolerance(stacked.rows(), stacked.cols()));
    let sol = lstsq(&stacked, &rhs, tol)?;
    let fitted = stacked.mul_vec(&sol.x);
    let rms = (0..channels)
        .map(|d| {
            let sq: f64 = (0..n).map(|k| (fitted[d * n + k] - rhs[d * n + k]).powi(2)).sum();
            (sq / n as f64).sqrt()
        })
        .collect();
    let bias = sol.x[h];
    let mut weights = sol.x;
    weights.truncate(h);
    Ok(OutputLayer { weights, bias, rms })
}

/// Residual of the stacked least-squares system as unit columns are appended.
///
/// Each new column is orthogonalised against an orthonormal basis of the
/// earlier ones, so the residual can only shrink. Re-solving from scratch
/// through a truncated SVD can lose a direction once a larger singular
/// value raises the cutoff.
struct StackedResidual {
    basis: Vec<Vec<f64>>,
    residual: Vec<f64>,
    rows_per_channel: usize,
    cutoff: f64,
}

impl StackedResidual {
    /// Starts from the bias column alone.
    fn new(targets: &[Vec<f64>], cutoff: f64) -> Self {
        let n = targets[0].len();
        let mut s = Self { basis: Vec::new(), residual: targets.concat(), rows_per_channel: n, cutoff };
        let mut bias = vec![0.0; targets.len() * n];
        bias[..n].fill(1.0);
        s.push(bias);
        s
    }

    /// Appends one column; numerically dependent columns leave the residual as is.
    fn push(&mut self, column: Vec<f64>) {
        let Some(v) = normalized(column) else { return };
        let v = orthogonalize(&orthogonalize(&v, &self.basis), &self.basis);
        let left = norm(&v);
        if left <= self.cutoff {
            return;
        }
        let q: Vec<f64> = v.into_iter().map(|e| e / left).collect();
        let c = dot(&q, &self.residual);
        self.residual.iter_mut().zip(&q).for_each(|(r, qi)| *r -= c * qi);
        self.basis.push(q);
    }

    fn push_center(&mut self, center: f64, x: &[f64], channels: usize, basis: BasisKind) -> Result<()> {
        let mut col = Vec::with_capacity(channels * x.len());
        for d in 0..channels {
            col.extend(build_regressor(center, x, d, basis)?);
        }
        self.push(col);
        Ok(())
    }

    fn rms(&self) -> Vec<f64> {
        let n = self.rows_per_channel;
        self.residual.chunks(n).map(|c| (dot(c, c) / n as f64).sqrt()).collect()
    }
}

fn combined_rms(rms: &[f64], lambda: &[f64]) -> f64 {
    rms.iter().zip(lambda).map(|(r, l)| l * r * r).sum::<f64>().sqrt()
}

/// Dependence threshold for a unit column in the per-iteration residual.
fn stacked_cutoff(cfg: &TrainerConfig, rows: usize, max_units: usize) -> f64 {
    cfg.rank_tolerance.unwrap_or_else(|| default_rank_tolerance(rows, max_units + 1))
}

fn normalized(v: Vec<f64>) -> Option<Vec<f64>> {
    let n = dot(&v, &v).sqrt();
    (n > 0.0).then(|| v.into_iter().map(|x| x / n).collect())
}

/// Raw regressor matrices (one per order) for the given centers.
fn regressor_matrices(centers: &[f64], x: &[f64], channels: usize, basis: BasisKind) -> Result<Vec<Matrix>> {
    (0..channels)
        .map(|d| {
            let cols = centers.iter().map(|&c| build_regressor(c, x, d, basis)).collect::<Result<Vec<_>>>()?;
            if cols.is_empty() {
                return Ok(Matrix::zeros(x.len(), 0));
            }
            Matrix::from_columns(&cols)
        })
        .collect()
}

struct Prepared {
    candidates: Vec<f64>,
    max_units: usize,
    channels: usize,
}

fn prepare(ts: &TrainingSet, cfg: &TrainerConfig, basis: BasisKind) -> Result<Prepared> {
    let channels = ts.order() + 1;
    cfg.validate(channels)?;
    basis.check_order(ts.order())?;
    let candidates = build_candidates(ts, &cfg.candidate_grid)?;
    let max_units = match cfg.max_units {
        Some(h) if h > candidates.len() => {
            return Err(Error::invalid(format!("max_units {h} exceeds the {} available candidates", candidates.len())))
        }
        Some(h) => h,
        None => candidates.len(),
    };
    Ok(Prepared { candidates, max_units, channels })
}

struct Picked {
    index: usize,
    tot_err: f64,
    err: Vec<f64>,
    joint: bool,
}

/// Stacked, `sqrt(lambda)`-weighted regressors and the orthogonal basis of
/// the span already covered (bias column plus selected units).
struct JointState {
    stacked: Vec<Option<Vec<f64>>>,
    basis: Vec<Vec<f64>>,
    target: Vec<f64>,
    min_norm: f64,
}

impl JointState {
    fn new(
        candidates: &[f64],
        is_selected: &[bool],
        x: &[f64],
        targets: &[Vec<f64>],
        lambda: &[f64],
        kind: BasisKind,
        min_norm: f64,
    ) -> Result<Self> {
        let n = x.len();
        let weights: Vec<f64> = lambda.iter().map(|l| l.sqrt()).collect();
        let stack = |c: f64| -> Result<Option<Vec<f64>>> {
            let mut v = Vec::with_capacity(n * lambda.len());
            for (d, w) in weights.iter().enumerate() {
                v.extend(build_regressor(c, x, d, kind)?.into_iter().map(|p| w * p));
            }
            Ok(normalized(v))
        };
        let stacked: Vec<Option<Vec<f64>>> = candidates.iter().map(|&c| stack(c)).collect::<Result<_>>()?;
        let target = targets.iter().zip(&weights).flat_map(|(t, w)| t.iter().map(move |v| w * v)).collect();

        let mut bias = vec![0.0; n * lambda.len()];
        bias[..n].iter_mut().for_each(|b| *b = weights[0]);
        let mut state = Self { stacked, basis: Vec::new(), target, min_norm };
        state.absorb(bias);
        for i in (0..candidates.len()).filter(|&i| is_selected[i]) {
            if let Some(v) = state.stacked[i].clone() {
                state.absorb(v);
            }
        }
        Ok(state)
    }

    fn orth(&self, v: &[f64]) -> Vec<f64> {
        orthogonalize(&orthogonalize(v, &self.basis), &self.basis)
    }

    /// Adds the part of `v` not yet spanned, unless it is negligible.
    fn absorb(&mut self, v: Vec<f64>) {
        let Some(v) = normalized(v) else { return };
        let w = self.orth(&v);
        if dot(&w, &w) > self.min_norm {
            self.basis.extend(normalized(w));
        }
    }

    fn select(&mut self, available: &[bool]) -> Option<Picked> {
        let scores: Vec<Option<ErrorReduction>> = (0..self.stacked.len())
            .into_par_iter()
            .map(|i| match (&self.stacked[i], available[i]) {
                (Some(v), true) => Some(error_reduction_ratio(&self.orth(v), &self.target, self.min_norm)),
                _ => None,
            })
            .collect();
        let live: Vec<(usize, &ErrorReduction)> = scores
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.as_ref().filter(|e| !e.degenerate).map(|e| (i, e)))
            .collect();
        let keyed: Vec<(f64, f64)> = live.iter().map(|(_, e)| (e.ratio, e.remaining)).collect();
        let (index, ratio) = live.get(tie_break(&keyed)?).map(|(i, e)| (*i, e.ratio))?;
        let v = self.stacked[index].clone().expect("scored candidate has a regressor");
        self.absorb(v);
        Some(Picked { index, tot_err: ratio, err: Vec::new(), joint: true })
    }
}

/// Derivative-constrained OLS: greedy center selection on the weighted sum
/// of per-order error reduction ratios, then a stacked least-squares solve
/// for the output layer.
pub fn train(ts: &TrainingSet, cfg: &TrainerConfig, basis: BasisKind) -> Result<(RbfNetwork, TrainReport)> {
    train_with_diagnostics(ts, cfg, basis).map(|run| (run.network, run.report))
}

pub fn train_with_diagnostics(ts: &TrainingSet, cfg: &TrainerConfig, basis: BasisKind) -> Result<TrainRun> {
    let Prepared { candidates, max_units, channels } = prepare(ts, cfg, basis)?;
    let x = ts.x();
    let targets = ts.targets();

    // Unit-norm raw regressors; scaling leaves the ratios and the
    // orthogonalized directions unchanged and makes the degeneracy floor relative.
    let raw: Vec<Vec<Option<Vec<f64>>>> = candidates
        .iter()
        .map(|&c| (0..channels).map(|d| build_regressor(c, x, d, basis).map(normalized)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let zero = vec![0.0; x.len()];

    let mut available = vec![true; candidates.len()];
    let mut sets: Vec<Vec<Vec<f64>>> = vec![Vec::new(); channels];
    let mut selected = Vec::new();
    let mut records = Vec::new();
    let mut residual = StackedResidual::new(targets, stacked_cutoff(cfg, x.len() * channels, max_units));

    let mut joint: Option<JointState> = None;

    let stopped_reason = loop {
        let choice = if let Some(js) = joint.as_mut() {
            match js.select(&available) {
                Some(c) => c,
                None => break StopReason::CandidatesExhausted,
            }
        } else {
            let orth: Vec<Option<Vec<Vec<f64>>>> = (0..candidates.len())
                .into_par_iter()
                .map(|i| {
                    available[i].then(|| {
                        (0..channels)
                            .map(|d| match &raw[i][d] {
                                // Two passes keep the selected sets orthogonal to working precision.
                                Some(p) => orthogonalize(&orthogonalize(p, &sets[d]), &sets[d]),
                                None => zero.clone(),
                            })
                            .collect()
                    })
                })
                .collect();
            let (choice, degenerate) = select_next(&orth, targets, &cfg.lambda, cfg.min_regressor_norm);
            for i in degenerate {
                available[i] = false;
            }
            match choice {
                Some(choice) => {
                    let mut chosen = orth[choice.index].clone().expect("selected candidate was available");
                    for (d, e) in choice.per_order.iter().enumerate() {
                        if !e.degenerate {
                            sets[d].push(std::mem::take(&mut chosen[d]));
                        }
                    }
                    Picked {
                        index: choice.index,
                        tot_err: choice.tot_err,
                        err: choice.per_order.iter().map(|e| e.ratio).collect(),
                        joint: false,
                    }
                }
                None if cfg.saturation == Saturation::Joint && channels > 1 => {
                    let is_selected: Vec<bool> = candidates.iter().map(|c| selected.contains(c)).collect();
                    available = is_selected.iter().map(|s| !s).collect();
                    let js = joint.insert(JointState::new(
                        &candidates,
                        &is_selected,
                        x,
                        targets,
                        &cfg.lambda,
                        basis,
                        cfg.min_regressor_norm,
                    )?);
                    match js.select(&available) {
                        Some(c) => c,
                        None => break StopReason::CandidatesExhausted,
                    }
                }
                None => break StopReason::CandidatesExhausted,
            }
        };
        available[choice.index] = false;
        selected.push(candidates[choice.index]);

        residual.push_center(candidates[choice.index], x, channels, basis)?;
        let rms = residual.rms();
        let combined = combined_rms(&rms, &cfg.lambda);
        records.push(IterationRecord {
            chosen_index: choice.index,
            center: candidates[choice.index],
            err: if choice.joint { vec![0.0; channels] } else { choice.err },
            tot_err: choice.tot_err,
            rms,
            combined_rms_error_after_solve: combined,
            joint: choice.joint,
        });

        if combined <= cfg.error_tolerance {
            break StopReason::ToleranceMet;
        }
        if selected.len() >= max_units {
            break StopReason::BudgetExhausted;
        }
    };

    let layer = solve_output_layer(&regressor_matrices(&selected, x, channels, basis)?, targets, cfg.rank_tolerance)?;
    let network = RbfNetwork::new(basis, selected.clone(), layer.weights, layer.bias, ts.order())?;
    Ok(TrainRun {
        network,
        report: TrainReport {
            candidate_count: candidates.len(),
            selected_centers: selected,
            per_iteration: records,
            stopped_reason,
        },
        orthogonal_sets: sets,
    })
}

/// Classic OLS on the map values only.
///
/// Written as the textbook incremental Gram-Schmidt recursion on the raw
/// regressors, independent of [`train`]'s code path, so the two can check
/// each other when `train` weights only the map channel.
pub fn train_classic(ts: &TrainingSet, cfg: &TrainerConfig) -> Result<(RbfNetwork, TrainReport)> {
    let basis = BasisKind::Cubic;
    train_classic_with_basis(ts, cfg, basis)
}

pub fn train_classic_with_basis(
    ts: &TrainingSet,
    cfg: &TrainerConfig,
    basis: BasisKind,
) -> Result<(RbfNetwork, TrainReport)> {
    if ts.order() != 0 {
        return Err(Error::invalid("classic OLS takes map targets only"));
    }
    let Prepared { candidates, max_units, .. } = prepare(ts, cfg, basis)?;
    let x = ts.x();
    let t = &ts.targets()[0];
    let tt = dot(t, t);

    let mut work: Vec<Option<Vec<f64>>> = Vec::with_capacity(candidates.len());
    let mut raw_norm2 = Vec::with_capacity(candidates.len());
    for &c in &candidates {
        let p = build_regressor(c, x, 0, basis)?;
        raw_norm2.push(dot(&p, &p));
        work.push(Some(p));
    }

    let mut selected = Vec::new();
    let mut chosen: Vec<Vec<f64>> = Vec::new();
    let mut records = Vec::new();
    let mut residual = StackedResidual::new(ts.targets(), stacked_cutoff(cfg, x.len(), max_units));
    let stopped_reason = loop {
        // (index, err, remaining fraction of the raw norm)
        let mut scored: Vec<(usize, f64, f64)> = Vec::new();
        for i in 0..work.len() {
            let Some(w) = &work[i] else { continue };
            let ww = dot(w, w);
            if ww <= cfg.min_regressor_norm * raw_norm2[i] {
                work[i] = None;
                continue;
            }
            let g = dot(w, t);
            scored.push((i, if tt == 0.0 { 0.0 } else { (g * g / (ww * tt)).min(1.0) }, ww / raw_norm2[i]));
        }
        let keyed: Vec<(f64, f64)> = scored.iter().map(|s| (s.1, s.2)).collect();
        let Some((i, err, _)) = tie_break(&keyed).map(|k| scored[k]) else {
            break StopReason::CandidatesExhausted;
        };
        let u = work[i].take().expect("best candidate is live");
        chosen.push(u);
        for w in work.iter_mut().flatten() {
            let u = chosen.last().expect("just pushed");
            let c = dot(u, w) / dot(u, u);
            w.iter_mut().zip(u).for_each(|(wi, ui)| *wi -= c * ui);
            // Cancellation leaves nearly parallel remainders with components
            // along earlier directions; one more sweep removes them.
            for u in &chosen {
                let c = dot(u, w) / dot(u, u);
                w.iter_mut().zip(u).for_each(|(wi, ui)| *wi -= c * ui);
            }
        }
        selected.push(candidates[i]);

        residual.push_center(candidates[i], x, 1, basis)?;
        let rms = residual.rms();
        let combined = rms[0];
        records.push(IterationRecord {
            chosen_index: i,
            center: candidates[i],
            err: vec![err],
            tot_err: err,
            rms,
            combined_rms_error_after_solve: combined,
            joint: false,
        });
        if combined <= cfg.error_tolerance {
            break StopReason::ToleranceMet;
        }
        if selected.len() >= max_units {
            break StopReason::BudgetExhausted;
        }
    };
    let layer = solve_output_layer(&regressor_matrices(&selected, x, 1, basis)?, ts.targets(), cfg.rank_tolerance)?;
    let network = RbfNetwork::new(basis, selected.clone(), layer.weights, layer.bias, 0)?;
    Ok((
        network,
        TrainReport {
            candidate_count: candidates.len(),
            selected_centers: selected,
            per_iteration: records,
            stopped_reason,
        },
    ))
}
