//! The single-loop feedback system: a delay line of `L` samples, an optional
//! two-tap low-pass `H(z) = b1 + b2 z^-1`, and a scalar map closing the loop.

mod analysis;
mod period;
mod simulate;
mod system;

pub use analysis::{
    default_grid_size, jacobian_char_poly, jacobian_eigenvalues, jacobian_matrix, max_root_magnitude, nyquist_q,
    open_loop_response, oscillation_slope_bound, stability_margin, AnalysisReport, StabilityMargin,
};
pub use period::{
    build_oscillator_map_spec, build_period_training_set, build_period_training_set_with, oscillator_fixed_points,
    ConvolutionMode, PeriodOptions, SlopeSign,
};
pub use simulate::{
    distance_to_orbit, measure_recovery, rms, simulate, simulate_recording, CoefficientPerturbation, DisturbanceEvent,
    DisturbanceSchedule, NoiseWindow, Recovery, SimulationTrace, RECOVERY_SLACK,
};
pub use system::{FeedbackSystem, FirFilter, FnMap, LinearMap, LoopState, ScalarMap};
