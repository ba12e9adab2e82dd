//! The two distributed equilibrium-seeking schemes, their certificates and monitors.

mod certificate;
mod monitor;
mod run;
mod state;

pub use certificate::{
    alpha_bound, beta_bound, certify, ConsensusLyapunov, StepSizeCertificate, TrackingLyapunov,
};
pub use monitor::{
    diagnostics, estimation_error, lyapunov_values, tracking_error, tracking_residual,
    DiagnosticsRecord, LyapunovValues,
};
pub use run::{run, DescentSummary, RunOptions, Trajectory, DESCENT_FLOOR};
pub use state::{
    init_general, init_special, psi_offsets, step_general, step_special, Algorithm,
    AlgorithmState, GeneralCaseState, SpecialCaseState, DIVERGENCE_LIMIT,
};
