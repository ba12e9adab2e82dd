//! Resource-allocation games between coalitions.

mod cases;
mod equilibrium;
mod objective;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{spectral_norm, symmetric_eigenvalues, DenseMatrix};
use crate::topology::NetworkTopology;

pub use cases::{case1, case2, intra_coupled_control, CASE_HOLDINGS, CASE_RESOURCES};
pub use equilibrium::{solve_ne, verify_ne, NeResult};
pub use objective::{Objective, QuadraticObjective, SmoothObjective};

/// Tolerance for `Σ_j R_ij = R_i`.
pub const RESOURCE_TOL: f64 = 1e-12;

/// Smallest admissible strong-monotonicity constant.
pub const MU_FLOOR: f64 = 1e-12;

/// Which information structure the objectives have.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameKind {
    /// Each member's cost ignores the other members of its own coalition.
    Special,
    /// Members' costs may depend on teammates' decisions.
    General,
}

/// Lipschitz and monotonicity constants of a game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConstants {
    /// `l_ij`, flattened by agent.
    pub l_agent: Vec<f64>,
    /// `l_i = Σ_j l_ij`.
    pub l_coalition: Vec<f64>,
    pub mu: f64,
}

impl GameConstants {
    /// Builds the constants from per-agent Lipschitz values.
    pub fn from_agent_values(topology: &NetworkTopology, l_agent: Vec<f64>, mu: f64) -> Result<Self> {
        if l_agent.len() != topology.n_sum() {
            return Err(Error::Validation(format!(
                "expected {} Lipschitz constants, got {}",
                topology.n_sum(),
                l_agent.len()
            )));
        }
        if !mu.is_finite() || mu <= MU_FLOOR {
            return Err(Error::NotStronglyMonotone { mu });
        }
        let l_coalition = (0..topology.num_coalitions())
            .map(|i| topology.coalition_range(i).map(|a| l_agent[a]).sum())
            .collect();
        Ok(Self { l_agent, l_coalition, mu })
    }
}

#[derive(Debug, Clone)]
pub struct Game {
    topology: Arc<NetworkTopology>,
    objectives: Vec<Objective>,
    holdings: Vec<f64>,
    resources: Vec<f64>,
    kind: GameKind,
    supplied_constants: Option<GameConstants>,
}

impl Game {
    /// Validates the inputs and infers the kind from the objectives' dependencies.
    pub fn new(
        topology: Arc<NetworkTopology>,
        objectives: Vec<Objective>,
        holdings: Vec<f64>,
        resources: Vec<f64>,
    ) -> Result<Self> {
        let n = topology.n_sum();
        if objectives.len() != n {
            return Err(Error::Validation(format!("expected {n} objectives, got {}", objectives.len())));
        }
        if holdings.len() != n {
            return Err(Error::Validation(format!("expected {n} holdings, got {}", holdings.len())));
        }
        if resources.len() != topology.num_coalitions() {
            return Err(Error::Validation(format!(
                "expected {} coalition resources, got {}",
                topology.num_coalitions(),
                resources.len()
            )));
        }
        if holdings.iter().chain(&resources).any(|v| !v.is_finite()) {
            return Err(Error::Validation("resources must be finite".into()));
        }
        for (a, obj) in objectives.iter().enumerate() {
            if let Objective::Quadratic(q) = obj {
                if q.owner != a {
                    return Err(Error::Validation(format!(
                        "objective at position {a} is owned by {}",
                        q.owner
                    )));
                }
                if q.coupling.len() != n {
                    return Err(Error::Validation(format!(
                        "coupling of agent {} has length {}, expected {n}",
                        topology.agent_id(a),
                        q.coupling.len()
                    )));
                }
                if q.coupling[a] != 0.0 {
                    return Err(Error::Validation(format!(
                        "agent {} couples to its own decision",
                        topology.agent_id(a)
                    )));
                }
                if !(q.q.is_finite() && q.b.is_finite() && q.coupling.iter().all(|c| c.is_finite())) {
                    return Err(Error::Validation(format!(
                        "objective of agent {} has non-finite data",
                        topology.agent_id(a)
                    )));
                }
            }
        }
        for i in 0..topology.num_coalitions() {
            let sum: f64 = topology.coalition_range(i).map(|a| holdings[a]).sum();
            if (sum - resources[i]).abs() > RESOURCE_TOL * resources[i].abs().max(1.0) {
                return Err(Error::Validation(format!(
                    "holdings of coalition {} sum to {sum}, expected {}",
                    i + 1,
                    resources[i]
                )));
            }
        }
        let kind = infer_kind(&topology, &objectives);
        Ok(Self {
            topology,
            objectives,
            holdings,
            resources,
            kind,
            supplied_constants: None,
        })
    }

    /// Overrides the inferred kind; `Special` requires the structural condition to hold.
    pub fn with_kind(mut self, kind: GameKind) -> Result<Self> {
        if kind == GameKind::Special && infer_kind(&self.topology, &self.objectives) != GameKind::Special {
            return Err(Error::Validation(
                "special kind requires every cost to ignore teammates' decisions".into(),
            ));
        }
        self.kind = kind;
        Ok(self)
    }

    /// Attaches constants for games whose objectives are not all quadratic.
    pub fn with_constants(mut self, constants: GameConstants) -> Result<Self> {
        if constants.l_agent.len() != self.n_sum() {
            return Err(Error::Validation("constants do not match the agent count".into()));
        }
        self.supplied_constants = Some(constants);
        Ok(self)
    }

    pub fn topology(&self) -> &NetworkTopology {
        &self.topology
    }

    pub fn topology_arc(&self) -> &Arc<NetworkTopology> {
        &self.topology
    }

    pub fn objectives(&self) -> &[Objective] {
        &self.objectives
    }

    /// Initial holdings `R_ij`.
    pub fn holdings(&self) -> &[f64] {
        &self.holdings
    }

    /// Coalition budgets `R_i`.
    pub fn resources(&self) -> &[f64] {
        &self.resources
    }

    pub fn kind(&self) -> GameKind {
        self.kind
    }

    pub fn n_sum(&self) -> usize {
        self.topology.n_sum()
    }

    /// All objectives quadratic, so the pseudo-gradient is affine.
    pub fn is_quadratic(&self) -> bool {
        self.objectives.iter().all(|o| o.as_quadratic().is_some())
    }

    /// `∂f_agent/∂x_target` at `point`.
    pub fn agent_partial(&self, agent: usize, target: usize, point: &[f64]) -> f64 {
        self.objectives[agent].partial(target, point)
    }

    /// `∂f_i/∂x_a = Σ_{l∈coalition(a)} ∂f_l/∂x_a` at `x`.
    pub fn coalition_partial(&self, a: usize, x: &[f64]) -> f64 {
        let i = self.topology.coalition_of(a);
        self.topology
            .coalition_range(i)
            .map(|l| self.objectives[l].partial(a, x))
            .sum()
    }

    /// Stacked coalition-wise partial gradients.
    pub fn pseudo_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        Ok((0..self.n_sum()).map(|a| self.coalition_partial(a, x)).collect())
    }

    /// Coalition objectives `f_i(x) = Σ_l f_il(x)`.
    pub fn coalition_values(&self, x: &[f64]) -> Vec<f64> {
        (0..self.topology.num_coalitions())
            .map(|i| {
                self.topology
                    .coalition_range(i)
                    .map(|a| self.objectives[a].value(x))
                    .sum()
            })
            .collect()
    }

    /// `max_i |1ᵀx_i − R_i|`.
    pub fn constraint_residual(&self, x: &[f64]) -> f64 {
        (0..self.topology.num_coalitions())
            .map(|i| {
                let s: f64 = self.topology.coalition_range(i).map(|a| x[a]).sum();
                (s - self.resources[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `max_i ‖L_i ∂f_i/∂x_i(x)‖_∞`.
    pub fn kkt_residual(&self, x: &[f64]) -> Result<f64> {
        let p = self.pseudo_gradient(x)?;
        Ok(self
            .laplacian_times(&p)
            .iter()
            .fold(0.0, |m, v| m.max(v.abs())))
    }

    /// Applies the block-diagonal `diag(L_1, …, L_N)` to a stacked vector.
    pub fn laplacian_times(&self, v: &[f64]) -> Vec<f64> {
        let t = &self.topology;
        let mut out = vec![0.0; t.n_sum()];
        for a in 0..t.n_sum() {
            let nbrs = t.intra_neighbors(a);
            out[a] = nbrs.len() as f64 * v[a] - nbrs.iter().map(|&b| v[b]).sum::<f64>();
        }
        out
    }

    /// Exact Jacobian `J` and offset `g` with `P(x) = J x + g`; quadratic games only.
    pub fn affine_pseudo_gradient(&self) -> Result<(DenseMatrix, Vec<f64>)> {
        let n = self.n_sum();
        let mut j = DenseMatrix::zeros(n, n);
        for (l, obj) in self.objectives.iter().enumerate() {
            let q = obj
                .as_quadratic()
                .ok_or_else(|| Error::UnsupportedObjective(format!("agent {} is not quadratic", self.topology.agent_id(l))))?;
            let i = self.topology.coalition_of(l);
            let h = q.hessian();
            for a in self.topology.coalition_range(i) {
                for r in 0..n {
                    j[(a, r)] += h[(a, r)];
                }
            }
        }
        let g = self.pseudo_gradient(&vec![0.0; n])?;
        Ok((j, g))
    }

    /// Lipschitz constants from exact Hessians and `μ` from the symmetrized Jacobian.
    pub fn compute_constants(&self) -> Result<GameConstants> {
        if let Some(c) = &self.supplied_constants {
            return Ok(c.clone());
        }
        if !self.is_quadratic() {
            return Err(Error::UnsupportedObjective(
                "constants of non-quadratic objectives must be supplied".into(),
            ));
        }
        let l_agent = self
            .objectives
            .iter()
            .map(|o| spectral_norm(&o.as_quadratic().expect("checked above").hessian()))
            .collect();
        let (j, _) = self.affine_pseudo_gradient()?;
        let mu = symmetric_eigenvalues(&j.symmetrized())?[0];
        GameConstants::from_agent_values(&self.topology, l_agent, mu)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_sum() {
            return Err(Error::InvalidArgument(format!(
                "point has length {}, expected {}",
                x.len(),
                self.n_sum()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("decision vector".into()));
        }
        Ok(())
    }
}

fn infer_kind(topology: &NetworkTopology, objectives: &[Objective]) -> GameKind {
    for (a, obj) in objectives.iter().enumerate() {
        let i = topology.coalition_of(a);
        if topology.coalition_range(i).any(|l| l != a && obj.depends_on(l)) {
            return GameKind::General;
        }
    }
    GameKind::Special
}
