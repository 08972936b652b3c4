//! Orthogonal least squares selection of radial units, with optional
//! constraints on the derivatives of the fitted map.

mod candidates;
mod data;
mod ols;

pub use candidates::{build_candidates, build_regressor, CandidateGrid, CandidateMode};
pub use data::TrainingSet;
pub use ols::{
    error_reduction_ratio, orthogonalize, select_next, solve_output_layer, train, train_classic,
    train_classic_with_basis, train_with_diagnostics, ErrorReduction, IterationRecord, OutputLayer, Saturation,
    Selection, StopReason, TrainReport, TrainRun, TrainerConfig,
};
