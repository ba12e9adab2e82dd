//! Per-iteration diagnostics: residuals, estimation errors and Lyapunov values.

use serde::{Deserialize, Serialize};

use super::certificate::StepSizeCertificate;
use super::state::{psi_offsets, AlgorithmState};
use super::Algorithm;
use crate::error::{Error, Result};
use crate::game::Game;
use crate::numerics::norm2;
use crate::topology::NetworkTopology;

/// Lyapunov function values at one iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovValues {
    /// `Σ_i ‖L_i ∂f_i/∂x_i(x)‖²`.
    pub v_x: f64,
    /// `Σ_i ‖L_i ∂f_i/∂x_i(x)‖² / (2 n_i)`.
    pub v_bar_x: f64,
    /// `e_ξᵀ W_M e_ξ`.
    pub v_xi: f64,
    /// `e_ψᵀ W_c e_ψ` (gradient-tracking scheme only).
    pub v_psi: Option<f64>,
    /// `V_x + γ V_ξ`, or `V̄_x + γ_ψ V_ψ + γ_ξ V_ξ`.
    pub total: f64,
}

/// One logged row of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub k: usize,
    pub x: Vec<f64>,
    pub constraint_residual: f64,
    /// `‖ξ − 1 ⊗ x‖`.
    pub e_xi_norm: f64,
    /// `‖ψ_i − 1 ⊗ ψ̄_i‖`, stacked over coalitions.
    pub e_psi_norm: Option<f64>,
    /// `max_i ‖ψ̄_i − Q̄_i(ξ_i)‖_∞`.
    pub tracking_residual: Option<f64>,
    pub lyapunov: Option<LyapunovValues>,
    pub dist_to_ne: Option<f64>,
    pub kkt_residual: f64,
}

/// `e_ξ = ξ − 1 ⊗ x`, agent-major.
pub fn estimation_error(topology: &NetworkTopology, xi: &[f64], x: &[f64]) -> Vec<f64> {
    let n = topology.n_sum();
    xi.iter().enumerate().map(|(k, v)| v - x[k % n]).collect()
}

/// Coalition means `ψ̄_i`, concatenated over coalitions.
fn psi_means(topology: &NetworkTopology, psi: &[f64]) -> Vec<f64> {
    let offsets = psi_offsets(topology);
    let mut means = vec![0.0; topology.n_sum()];
    for i in 0..topology.num_coalitions() {
        let range = topology.coalition_range(i);
        let size = range.len() as f64;
        for a in range.clone() {
            for (t, v) in psi[offsets[a]..offsets[a + 1]].iter().enumerate() {
                means[range.start + t] += v / size;
            }
        }
    }
    means
}

/// `e_ψ = ψ − 1 ⊗ ψ̄` per coalition, in the layout of `ψ`.
pub fn tracking_error(topology: &NetworkTopology, psi: &[f64]) -> Vec<f64> {
    let offsets = psi_offsets(topology);
    let means = psi_means(topology, psi);
    let mut out = psi.to_vec();
    for a in 0..topology.n_sum() {
        let lo = topology.offset(topology.coalition_of(a));
        for (t, v) in out[offsets[a]..offsets[a + 1]].iter_mut().enumerate() {
            *v -= means[lo + t];
        }
    }
    out
}

/// `max_i ‖ψ̄_i − (1/n_i) Σ_j ∇_{x_i} f_ij(ξ_ij)‖_∞`.
pub fn tracking_residual(game: &Game, xi: &[f64], psi: &[f64]) -> f64 {
    let t = game.topology();
    let n = t.n_sum();
    let means = psi_means(t, psi);
    let mut worst = 0.0f64;
    for i in 0..t.num_coalitions() {
        let range = t.coalition_range(i);
        let size = range.len() as f64;
        for target in range.clone() {
            let q_bar: f64 = range
                .clone()
                .map(|a| game.agent_partial(a, target, &xi[a * n..(a + 1) * n]))
                .sum::<f64>()
                / size;
            worst = worst.max((means[target] - q_bar).abs());
        }
    }
    worst
}

/// Evaluates the Lyapunov functions of the scheme the certificate was built for.
pub fn lyapunov_values(
    state: &AlgorithmState,
    game: &Game,
    certificate: &StepSizeCertificate,
) -> Result<LyapunovValues> {
    if state.algorithm() != certificate.mode {
        return Err(Error::InvalidArgument(format!(
            "certificate for the {} scheme applied to a {} state",
            certificate.mode,
            state.algorithm()
        )));
    }
    let t = game.topology();
    let l_grad = game.laplacian_times(&game.pseudo_gradient(state.x())?);
    let mut v_x = 0.0;
    let mut v_bar_x = 0.0;
    for i in 0..t.num_coalitions() {
        let range = t.coalition_range(i);
        let size = range.len() as f64;
        let sq: f64 = l_grad[range].iter().map(|v| v * v).sum();
        v_x += sq;
        v_bar_x += sq / (2.0 * size);
    }
    let v_xi = certificate
        .consensus
        .quadratic_form(&estimation_error(t, state.xi(), state.x()));
    Ok(match state {
        AlgorithmState::Special(_) => LyapunovValues {
            v_x,
            v_bar_x,
            v_xi,
            v_psi: None,
            total: v_x + certificate.gamma.unwrap_or(0.0) * v_xi,
        },
        AlgorithmState::General(s) => {
            let e = tracking_error(t, &s.psi);
            let offsets = psi_offsets(t);
            let mut v_psi = 0.0;
            for i in 0..t.num_coalitions() {
                let range = t.coalition_range(i);
                let w = &certificate.tracking[i].w_c;
                // (W_{c_i} ⊗ I) couples member blocks entry by entry.
                for (j, a) in range.clone().enumerate() {
                    for (m, b) in range.clone().enumerate() {
                        let wjm = w[(j, m)];
                        if wjm == 0.0 {
                            continue;
                        }
                        let dot: f64 = e[offsets[a]..offsets[a + 1]]
                            .iter()
                            .zip(&e[offsets[b]..offsets[b + 1]])
                            .map(|(u, v)| u * v)
                            .sum();
                        v_psi += wjm * dot;
                    }
                }
            }
            let total = v_bar_x
                + certificate.gamma_psi.unwrap_or(0.0) * v_psi
                + certificate.gamma_xi.unwrap_or(0.0) * v_xi;
            LyapunovValues {
                v_x,
                v_bar_x,
                v_xi,
                v_psi: Some(v_psi),
                total,
            }
        }
    })
}

/// Full diagnostics row at `state`.
pub fn diagnostics(
    state: &AlgorithmState,
    game: &Game,
    certificate: Option<&StepSizeCertificate>,
    oracle_ne: Option<&[f64]>,
) -> Result<DiagnosticsRecord> {
    let t = game.topology();
    let x = state.x();
    let (e_psi_norm, tracking) = match state.psi() {
        Some(psi) => (
            Some(norm2(&tracking_error(t, psi))),
            Some(tracking_residual(game, state.xi(), psi)),
        ),
        None => (None, None),
    };
    let lyapunov = match certificate {
        Some(c) if c.mode == state.algorithm() => Some(lyapunov_values(state, game, c)?),
        _ => None,
    };
    Ok(DiagnosticsRecord {
        k: state.k(),
        x: x.to_vec(),
        constraint_residual: game.constraint_residual(x),
        e_xi_norm: norm2(&estimation_error(t, state.xi(), x)),
        e_psi_norm,
        tracking_residual: tracking,
        lyapunov,
        dist_to_ne: oracle_ne.map(|ne| {
            norm2(&x.iter().zip(ne).map(|(a, b)| a - b).collect::<Vec<_>>())
        }),
        kkt_residual: game.kkt_residual(x)?,
    })
}

impl Algorithm {
    /// Name of the step parameter in reports.
    pub fn step_symbol(self) -> &'static str {
        match self {
            Algorithm::Special => "alpha",
            Algorithm::General => "beta",
        }
    }
}
