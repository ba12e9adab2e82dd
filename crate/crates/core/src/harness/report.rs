//! Running a scenario and exporting its trajectory and report.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::scenario::{Scenario, StepSpec};
use crate::engine::{certify, run, Algorithm, RunOptions, StepSizeCertificate, Trajectory};
use crate::error::{Error, Result};
use crate::game::{solve_ne, Game, NeResult};

/// Allowed per-entry gap between the final iterate and a scenario's reference equilibrium.
pub const REFERENCE_TOL: f64 = 0.05;

/// Tolerance handed to the equilibrium oracle.
pub const ORACLE_TOL: f64 = 1e-9;

/// Iterations covered by the linear-rate fit.
pub const RATE_FIT_WINDOW: usize = 2_000;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const REPORT_FILE: &str = "report.json";

/// Command-line overrides of the scenario's algorithm section.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub max_iters: Option<usize>,
    pub step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub bound: f64,
    pub rate: f64,
    pub step_within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub algorithm: Algorithm,
    pub step: f64,
    pub iterations: usize,
    pub stopped_early: bool,
    pub final_x: Vec<f64>,
    pub final_values: Vec<f64>,
    pub kkt_residual: f64,
    /// Worst coalition-sum residual over the whole run.
    pub max_constraint_residual: f64,
    pub max_tracking_residual: Option<f64>,
    pub oracle_ne: Vec<f64>,
    pub oracle_values: Vec<f64>,
    /// `‖x(final) − x*‖` against the oracle.
    pub final_distance: f64,
    /// Least-squares slope of `ln ‖x(k) − x*‖` over the first iterations.
    pub convergence_slope: Option<f64>,
    pub convergence_r_squared: Option<f64>,
    pub certificate: Option<CertificateSummary>,
    /// `max_j |x_j(final) − reference_j|` when the scenario lists a reference.
    pub reference_max_error: Option<f64>,
    /// Whether the final iterate matches the reference within tolerance.
    pub passed: Option<bool>,
    pub trajectory_csv: PathBuf,
}

/// Everything produced by [`run_scenario`].
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub report: RunReport,
    pub trajectory: Trajectory,
    pub oracle: NeResult,
    pub certificate: Option<StepSizeCertificate>,
}

/// Least-squares line through `(k, y)`: slope and coefficient of determination.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((slope, r2))
}

/// Fit of `ln dist_to_ne` against `k` over logged iterations `k ≤ window`.
pub fn convergence_fit(trajectory: &Trajectory, window: usize) -> Option<(f64, f64)> {
    let points: Vec<(f64, f64)> = trajectory
        .records
        .iter()
        .filter(|r| r.k <= window)
        .filter_map(|r| r.dist_to_ne.filter(|d| *d > 0.0).map(|d| (r.k as f64, d.ln())))
        .collect();
    linear_fit(&points)
}

fn resolve_step(scenario: &Scenario, overrides: &Overrides, cert: Option<&StepSizeCertificate>) -> Result<f64> {
    if let Some(s) = overrides.step {
        return Ok(s);
    }
    match scenario.algorithm.step {
        StepSpec::Value(s) => Ok(s),
        StepSpec::Keyword(_) => cert.map(|c| c.bound).ok_or_else(|| {
            Error::Validation("step is \"certified\" but no certificate exists for this game".into())
        }),
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

/// Writes the logged records as CSV.
pub fn write_trajectory_csv(path: &Path, game: &Game, trajectory: &Trajectory) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    let mut header = vec!["k".to_string()];
    header.extend(game.topology().agents().map(|id| format!("x_{id}")));
    header.extend(
        ["constraint_res", "e_xi_norm", "e_psi_norm", "V", "dist_to_ne", "kkt_res"].map(String::from),
    );
    writeln!(out, "{}", header.join(","))?;
    for r in &trajectory.records {
        let mut row = vec![r.k.to_string()];
        row.extend(r.x.iter().map(|v| fmt_num(*v)));
        row.push(fmt_num(r.constraint_residual));
        row.push(fmt_num(r.e_xi_norm));
        row.push(fmt_opt(r.e_psi_norm));
        row.push(fmt_opt(r.lyapunov.map(|l| l.total)));
        row.push(fmt_opt(r.dist_to_ne));
        row.push(fmt_num(r.kkt_residual));
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Solves for the equilibrium, runs the configured scheme and writes
/// `trajectory.csv` and `report.json` into `output_dir`.
pub fn run_scenario(scenario: &Scenario, output_dir: &Path, overrides: &Overrides) -> Result<ScenarioOutcome> {
    let game = scenario.build_game()?;
    let oracle = solve_ne(&game, ORACLE_TOL)?;
    let algorithm = scenario.algorithm.mode;
    let certificate = match certify(&game, algorithm) {
        Ok(c) => Some(c),
        Err(e) => {
            log::warn!("no step-size certificate: {e}");
            None
        }
    };
    let step = resolve_step(scenario, overrides, certificate.as_ref())?;
    let options = RunOptions {
        max_iters: overrides.max_iters.unwrap_or(scenario.algorithm.max_iters),
        stop_tol: scenario.algorithm.stop_tol.unwrap_or(f64::INFINITY),
        log_stride: scenario.algorithm.log_stride,
        oracle_ne: Some(oracle.x_star.clone()),
        monitor_descent: false,
    };
    log::info!("running {} scheme on `{}` with step {step}", algorithm, scenario.name);
    let trajectory = run(&game, algorithm, step, &options, certificate.as_ref())?;

    fs::create_dir_all(output_dir)?;
    let csv_path = output_dir.join(TRAJECTORY_FILE);
    write_trajectory_csv(&csv_path, &game, &trajectory)?;

    let final_x = trajectory.final_x().to_vec();
    let reference_max_error = scenario.reference_ne.as_ref().map(|r| {
        final_x
            .iter()
            .zip(r)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    });
    let fit = convergence_fit(&trajectory, RATE_FIT_WINDOW);
    let final_distance = trajectory
        .records
        .last()
        .and_then(|r| r.dist_to_ne)
        .unwrap_or(f64::NAN);
    let report = RunReport {
        scenario: scenario.name.clone(),
        algorithm,
        step,
        iterations: trajectory.iterations,
        stopped_early: trajectory.stopped_early,
        final_values: game.coalition_values(&final_x),
        kkt_residual: game.kkt_residual(&final_x)?,
        max_constraint_residual: trajectory.max_constraint_residual,
        max_tracking_residual: trajectory.max_tracking_residual,
        oracle_values: game.coalition_values(&oracle.x_star),
        oracle_ne: oracle.x_star.clone(),
        final_distance,
        convergence_slope: fit.map(|f| f.0),
        convergence_r_squared: fit.map(|f| f.1),
        certificate: certificate.as_ref().map(|c| CertificateSummary {
            bound: c.bound,
            rate: c.rate,
            step_within_bound: c.admits(step),
        }),
        passed: reference_max_error.map(|e| e <= REFERENCE_TOL),
        reference_max_error,
        final_x,
        trajectory_csv: csv_path,
    };
    fs::write(
        output_dir.join(REPORT_FILE),
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    Ok(ScenarioOutcome {
        report,
        trajectory,
        oracle,
        certificate,
    })
}
