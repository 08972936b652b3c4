//! Radial basis function networks fitted to values *and* derivatives with
//! orthogonal least squares, plus the tooling to study single-loop feedback
//! systems (delay line, two-tap low-pass, nonlinear map) whose periodic
//! behaviour is governed by those derivatives.
//!
//! * [`model`]: the network and its analytic derivatives.
//! * [`trainer`]: classic and derivative-constrained OLS training.
//! * [`feedback`]: loop simulation, Nyquist crossing, Jacobian spectra.
//! * [`numerics`]: least squares, polynomial roots and other small kernels.
//! * [`demos`]: deterministic reproductions of the reference experiments.

// `!(x > 0.0)` is the idiom used throughout to reject NaN along with
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod demos;
pub mod error;
pub mod feedback;
pub mod io;
pub mod model;
pub mod numerics;
pub mod trainer;

pub use error::{Error, Result};
pub use model::{basis_value, BasisKind, RbfNetwork};
pub use trainer::{train, train_classic, TrainReport, TrainerConfig, TrainingSet};
