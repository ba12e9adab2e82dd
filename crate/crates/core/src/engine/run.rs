use serde::{Deserialize, Serialize};

use super::certificate::StepSizeCertificate;
use super::monitor::{diagnostics, lyapunov_values, tracking_residual, DiagnosticsRecord};
use super::state::{Algorithm, AlgorithmState};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::numerics::norm2;

/// Lyapunov value below which descent is no longer checked.
pub const DESCENT_FLOOR: f64 = 1e-18;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub max_iters: usize,
    /// Stop once `‖x(k+1) − x(k)‖ < stop_tol`; a non-finite or non-positive value disables stopping.
    pub stop_tol: f64,
    /// Log every `log_stride`-th iterate (the first and last are always logged).
    pub log_stride: usize,
    pub oracle_ne: Option<Vec<f64>>,
    /// Evaluate the Lyapunov function at every iteration and check strict descent.
    pub monitor_descent: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            stop_tol: f64::INFINITY,
            log_stride: 1,
            oracle_ne: None,
            monitor_descent: false,
        }
    }
}

/// Outcome of the per-iteration descent check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentSummary {
    pub initial_value: f64,
    pub final_value: f64,
    /// Iterations at which `V(k+1) < V(k)` was checked.
    pub checked: usize,
    pub violations: usize,
    pub first_violation: Option<usize>,
    /// Largest observed `V(k+1) / V(k)`.
    pub max_ratio: f64,
    /// First iteration with `V < DESCENT_FLOOR`, if reached.
    pub floor_reached_at: Option<usize>,
}

impl DescentSummary {
    pub fn strictly_decreasing(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub algorithm: Algorithm,
    pub step: f64,
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: AlgorithmState,
    pub iterations: usize,
    pub stopped_early: bool,
    /// Worst coalition-sum residual over every iteration, logged or not.
    pub max_constraint_residual: f64,
    /// Worst gradient-tracking residual over every iteration.
    pub max_tracking_residual: Option<f64>,
    pub descent: Option<DescentSummary>,
    /// Set when a certificate was supplied and the step exceeds its bound.
    pub step_exceeds_certificate: Option<bool>,
}

impl Trajectory {
    pub fn final_x(&self) -> &[f64] {
        self.final_state.x()
    }
}

/// Runs `algorithm` from its initial state.
pub fn run(
    game: &Game,
    algorithm: Algorithm,
    step: f64,
    options: &RunOptions,
    certificate: Option<&StepSizeCertificate>,
) -> Result<Trajectory> {
    if !step.is_finite() || step < 0.0 {
        return Err(Error::InvalidArgument(format!("step size must be finite and non-negative, got {step}")));
    }
    if options.log_stride == 0 {
        return Err(Error::InvalidArgument("log stride must be positive".into()));
    }
    if let Some(ne) = &options.oracle_ne {
        if ne.len() != game.n_sum() {
            return Err(Error::InvalidArgument("reference equilibrium has the wrong length".into()));
        }
    }
    let certificate = certificate.filter(|c| c.mode == algorithm);
    let step_exceeds_certificate = certificate.map(|c| step > c.bound);
    if step_exceeds_certificate == Some(true) {
        log::info!(
            "{} = {step} exceeds the certified bound {:.3e}",
            algorithm.step_symbol(),
            certificate.map_or(0.0, |c| c.bound)
        );
    }
    let oracle = options.oracle_ne.as_deref();
    let stop_enabled = options.stop_tol.is_finite() && options.stop_tol > 0.0;

    let mut state = AlgorithmState::init(game, algorithm);
    let mut records = vec![diagnostics(&state, game, certificate, oracle)?];
    let mut max_constraint = records[0].constraint_residual;
    let mut max_tracking = records[0].tracking_residual;

    let mut descent = match (options.monitor_descent, certificate) {
        (true, Some(c)) => {
            let v0 = lyapunov_values(&state, game, c)?.total;
            Some(DescentSummary {
                initial_value: v0,
                final_value: v0,
                checked: 0,
                violations: 0,
                first_violation: None,
                max_ratio: 0.0,
                floor_reached_at: (v0 < DESCENT_FLOOR).then_some(0),
            })
        }
        (true, None) => {
            return Err(Error::InvalidArgument("descent monitoring needs a matching certificate".into()))
        }
        _ => None,
    };

    let mut iterations = 0;
    let mut stopped_early = false;
    while iterations < options.max_iters {
        let next = state.step(game, step)?;
        iterations += 1;
        max_constraint = max_constraint.max(game.constraint_residual(next.x()));
        if let Some(psi) = next.psi() {
            let r = tracking_residual(game, next.xi(), psi);
            max_tracking = Some(max_tracking.map_or(r, |m: f64| m.max(r)));
        }
        if let (Some(d), Some(c)) = (descent.as_mut(), certificate) {
            let v = lyapunov_values(&next, game, c)?.total;
            if d.floor_reached_at.is_none() {
                let prev = d.final_value;
                d.checked += 1;
                if v >= prev || v.is_nan() {
                    d.violations += 1;
                    d.first_violation.get_or_insert(iterations);
                }
                if prev > 0.0 {
                    d.max_ratio = d.max_ratio.max(v / prev);
                }
                if v < DESCENT_FLOOR {
                    d.floor_reached_at = Some(iterations);
                }
            }
            d.final_value = v;
        }
        let moved = norm2(
            &next
                .x()
                .iter()
                .zip(state.x())
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        );
        state = next;
        stopped_early = stop_enabled && moved < options.stop_tol;
        if iterations % options.log_stride == 0 || stopped_early || iterations == options.max_iters {
            records.push(diagnostics(&state, game, certificate, oracle)?);
        }
        if stopped_early {
            break;
        }
    }
    log::debug!("{algorithm} run finished after {iterations} iterations");

    Ok(Trajectory {
        algorithm,
        step,
        records,
        final_state: state,
        iterations,
        stopped_early,
        max_constraint_residual: max_constraint,
        max_tracking_residual: max_tracking,
        descent,
        step_exceeds_certificate,
    })
}
