use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Game, GameKind};
use crate::numerics::norm_inf;
use crate::topology::NetworkTopology;

/// `‖x‖_∞` beyond which a run counts as diverged.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Which distributed update rule to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Own-gradient exchange with leader-following estimation.
    Special,
    /// Adds per-coalition gradient tracking.
    General,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Special => "special",
            Algorithm::General => "general",
        })
    }
}

/// Iterate of the estimation-only scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecialCaseState {
    pub k: usize,
    pub x: Vec<f64>,
    pub eta: Vec<f64>,
    /// `ξ`, agent-major: entry `a * n_sum + p` is agent `a`'s estimate of `x_p`.
    pub xi: Vec<f64>,
}

/// Iterate of the gradient-tracking scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralCaseState {
    pub k: usize,
    pub x: Vec<f64>,
    pub eta: Vec<f64>,
    pub xi: Vec<f64>,
    /// `ψ`, agent-major; agent `a` of coalition `i` holds `n_i` entries, one per teammate.
    pub psi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "lowercase")]
pub enum AlgorithmState {
    Special(SpecialCaseState),
    General(GeneralCaseState),
}

impl AlgorithmState {
    pub fn init(game: &Game, algorithm: Algorithm) -> Self {
        match algorithm {
            Algorithm::Special => AlgorithmState::Special(init_special(game)),
            Algorithm::General => AlgorithmState::General(init_general(game)),
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            AlgorithmState::Special(_) => Algorithm::Special,
            AlgorithmState::General(_) => Algorithm::General,
        }
    }

    pub fn k(&self) -> usize {
        match self {
            AlgorithmState::Special(s) => s.k,
            AlgorithmState::General(s) => s.k,
        }
    }

    pub fn x(&self) -> &[f64] {
        match self {
            AlgorithmState::Special(s) => &s.x,
            AlgorithmState::General(s) => &s.x,
        }
    }

    pub fn eta(&self) -> &[f64] {
        match self {
            AlgorithmState::Special(s) => &s.eta,
            AlgorithmState::General(s) => &s.eta,
        }
    }

    pub fn xi(&self) -> &[f64] {
        match self {
            AlgorithmState::Special(s) => &s.xi,
            AlgorithmState::General(s) => &s.xi,
        }
    }

    pub fn psi(&self) -> Option<&[f64]> {
        match self {
            AlgorithmState::Special(_) => None,
            AlgorithmState::General(s) => Some(&s.psi),
        }
    }

    pub fn step(&self, game: &Game, step: f64) -> Result<Self> {
        Ok(match self {
            AlgorithmState::Special(s) => AlgorithmState::Special(step_special(s, game, step)?),
            AlgorithmState::General(s) => AlgorithmState::General(step_general(s, game, step)?),
        })
    }
}

/// Start index of each agent's block inside `ψ`, plus the total length.
pub fn psi_offsets(topology: &NetworkTopology) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(topology.n_sum() + 1);
    let mut acc = 0;
    offsets.push(0);
    for a in 0..topology.n_sum() {
        acc += topology.coalition_size(topology.coalition_of(a));
        offsets.push(acc);
    }
    offsets
}

/// `ξ_a^p(0) = x_p(0)` when `p` is `a` or one of its neighbours, else zero.
fn initial_estimates(topology: &NetworkTopology, x0: &[f64]) -> Vec<f64> {
    let n = topology.n_sum();
    let mut xi = vec![0.0; n * n];
    for a in 0..n {
        xi[a * n + a] = x0[a];
        for &p in topology.neighbors(a) {
            xi[a * n + p] = x0[p];
        }
    }
    xi
}

pub fn init_special(game: &Game) -> SpecialCaseState {
    if game.kind() == GameKind::General {
        log::warn!("estimation-only scheme on a game with teammate coupling; the limit need not be an equilibrium");
    }
    let x = game.holdings().to_vec();
    SpecialCaseState {
        k: 0,
        eta: vec![0.0; x.len()],
        xi: initial_estimates(game.topology(), &x),
        x,
    }
}

pub fn init_general(game: &Game) -> GeneralCaseState {
    let t = game.topology();
    let n = t.n_sum();
    let x = game.holdings().to_vec();
    let xi = initial_estimates(t, &x);
    let offsets = psi_offsets(t);
    let mut psi = vec![0.0; offsets[n]];
    for a in 0..n {
        let point = &xi[a * n..(a + 1) * n];
        let range = t.coalition_range(t.coalition_of(a));
        for (slot, target) in psi[offsets[a]..offsets[a + 1]].iter_mut().zip(range) {
            *slot = game.agent_partial(a, target, point);
        }
    }
    GeneralCaseState {
        k: 0,
        eta: vec![0.0; n],
        x,
        xi,
        psi,
    }
}

fn decisions_from_eta(game: &Game, eta: &[f64]) -> Vec<f64> {
    let l_eta = game.laplacian_times(eta);
    game.holdings().iter().zip(&l_eta).map(|(x0, le)| x0 - le).collect()
}

fn check_finite(k: usize, x: &[f64], parts: &[&[f64]]) -> Result<()> {
    if parts.iter().any(|p| p.iter().any(|v| !v.is_finite())) || norm_inf(x) > DIVERGENCE_LIMIT {
        return Err(Error::Diverged { iteration: k });
    }
    Ok(())
}

fn check_step(step: f64) -> Result<()> {
    if !step.is_finite() || step < 0.0 {
        return Err(Error::InvalidArgument(format!("step size must be finite and non-negative, got {step}")));
    }
    Ok(())
}

/// One synchronous iteration of the estimation-only scheme.
pub fn step_special(state: &SpecialCaseState, game: &Game, alpha: f64) -> Result<SpecialCaseState> {
    check_step(alpha)?;
    let t = game.topology();
    let n = t.n_sum();
    let own: Vec<f64> = (0..n)
        .map(|a| game.agent_partial(a, a, &state.xi[a * n..(a + 1) * n]))
        .collect();
    let l_own = game.laplacian_times(&own);
    let eta: Vec<f64> = state.eta.iter().zip(&l_own).map(|(e, d)| e + alpha * d).collect();
    let mut xi = vec![0.0; n * n];
    t.consensus_step(&state.xi, &state.x, &mut xi);
    let x = decisions_from_eta(game, &eta);
    let k = state.k + 1;
    check_finite(k, &x, &[&x, &eta, &xi])?;
    Ok(SpecialCaseState { k, x, eta, xi })
}

/// One synchronous iteration of the gradient-tracking scheme.
pub fn step_general(state: &GeneralCaseState, game: &Game, beta: f64) -> Result<GeneralCaseState> {
    check_step(beta)?;
    let t = game.topology();
    let n = t.n_sum();
    let offsets = psi_offsets(t);

    let mut eta = state.eta.clone();
    for a in 0..n {
        let lo = t.offset(t.coalition_of(a));
        let block = &state.psi[offsets[a]..offsets[a + 1]];
        let own = block[a - lo];
        let drift: f64 = t.intra_neighbors(a).iter().map(|&m| own - block[m - lo]).sum();
        eta[a] += beta * drift;
    }

    let mut xi = vec![0.0; n * n];
    t.consensus_step(&state.xi, &state.x, &mut xi);

    let mut psi = vec![0.0; offsets[n]];
    for a in 0..n {
        let i = t.coalition_of(a);
        let lo = t.offset(i);
        let c = t.mixing(i).expect("coalition index is valid");
        let row = c.row(a - lo);
        let out = &mut psi[offsets[a]..offsets[a + 1]];
        for m in std::iter::once(a).chain(t.intra_neighbors(a).iter().copied()) {
            let weight = row[m - lo];
            for (o, v) in out.iter_mut().zip(&state.psi[offsets[m]..offsets[m + 1]]) {
                *o += weight * v;
            }
        }
        let new_point = &xi[a * n..(a + 1) * n];
        let old_point = &state.xi[a * n..(a + 1) * n];
        for (local, o) in out.iter_mut().enumerate() {
            let target = lo + local;
            *o += game.agent_partial(a, target, new_point) - game.agent_partial(a, target, old_point);
        }
    }

    let x = decisions_from_eta(game, &eta);
    let k = state.k + 1;
    check_finite(k, &x, &[&x, &eta, &xi, &psi])?;
    Ok(GeneralCaseState { k, x, eta, xi, psi })
}
