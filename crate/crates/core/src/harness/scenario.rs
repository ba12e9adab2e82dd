//! Versioned JSON scenario files.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::engine::Algorithm;
use crate::error::{Error, Result};
use crate::game::{Game, Objective, QuadraticObjective};
use crate::topology::{AgentId, NetworkTopology};

pub const SCHEMA_VERSION: u32 = 1;

/// One-based `[coalition, member]` reference as written in scenario files.
pub type AgentRef = [usize; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    pub coalition_sizes: Vec<usize>,
    pub edges: Vec<[AgentRef; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSpec {
    pub agent: AgentRef,
    pub q: f64,
    pub b: f64,
    /// Sparse entries of the coupling vector.
    #[serde(default)]
    pub coupling: Vec<(AgentRef, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceSpec {
    /// Initial holdings, one list per coalition.
    pub per_agent: Vec<Vec<f64>>,
    pub coalition_totals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKeyword {
    /// Use the largest step the convergence certificate admits.
    Certified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepSpec {
    Value(f64),
    Keyword(StepKeyword),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub mode: Algorithm,
    pub step: StepSpec,
    pub max_iters: usize,
    /// `null` runs the full iteration budget.
    #[serde(default)]
    pub stop_tol: Option<f64>,
    #[serde(default = "default_stride")]
    pub log_stride: usize,
}

fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub topology: TopologySpec,
    pub objectives: Vec<ObjectiveSpec>,
    pub resources: ResourceSpec,
    pub algorithm: AlgorithmSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_ne: Option<Vec<f64>>,
}

pub const CASE1_JSON: &str = include_str!("../../scenarios/case1.json");
pub const CASE2_JSON: &str = include_str!("../../scenarios/case2.json");

/// Names accepted by [`builtin_scenario`].
pub const BUILTIN_NAMES: [&str; 2] = ["case1", "case2"];

/// Embedded scenario text by name.
pub fn builtin_scenario(name: &str) -> Option<&'static str> {
    match name {
        "case1" => Some(CASE1_JSON),
        "case2" => Some(CASE2_JSON),
        _ => None,
    }
}

fn to_id(r: AgentRef, what: &str) -> Result<AgentId> {
    if r[0] == 0 || r[1] == 0 {
        return Err(Error::Validation(format!("{what}: agent references are one-based, got {r:?}")));
    }
    Ok(AgentId::new(r[0] - 1, r[1] - 1))
}

impl Scenario {
    /// Parses and validates scenario text.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Parse(format!("at `{path}` (line {}, column {}): {inner}", inner.line(), inner.column()))
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Checks every reference and invariant by building the game.
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Validation(format!(
                "unsupported schema version {}, expected {SCHEMA_VERSION}",
                self.schema
            )));
        }
        if let StepSpec::Value(s) = self.algorithm.step {
            if !s.is_finite() || s <= 0.0 {
                return Err(Error::Validation(format!("step must be positive and finite, got {s}")));
            }
        }
        if self.algorithm.log_stride == 0 {
            return Err(Error::Validation("log_stride must be at least 1".into()));
        }
        if let Some(t) = self.algorithm.stop_tol {
            if t.is_nan() {
                return Err(Error::Validation("stop_tol must be a number or null".into()));
            }
        }
        let game = self.build_game()?;
        if let Some(r) = &self.reference_ne {
            if r.len() != game.n_sum() {
                return Err(Error::Validation(format!(
                    "reference_ne has {} entries, expected {}",
                    r.len(),
                    game.n_sum()
                )));
            }
        }
        Ok(())
    }

    pub fn build_topology(&self) -> Result<NetworkTopology> {
        let edges = self
            .topology
            .edges
            .iter()
            .map(|[a, b]| Ok((to_id(*a, "edge")?, to_id(*b, "edge")?)))
            .collect::<Result<Vec<_>>>()?;
        NetworkTopology::build(&self.topology.coalition_sizes, &edges)
    }

    pub fn build_game(&self) -> Result<Game> {
        let topology = Arc::new(self.build_topology()?);
        let n = topology.n_sum();
        let mut objectives: Vec<Option<Objective>> = vec![None; n];
        for spec in &self.objectives {
            let owner = topology
                .flat_index(to_id(spec.agent, "objective")?)
                .map_err(|_| Error::Validation(format!("objective for unknown agent {:?}", spec.agent)))?;
            if objectives[owner].is_some() {
                return Err(Error::Validation(format!("agent {:?} has two objectives", spec.agent)));
            }
            let mut coupling = vec![0.0; n];
            for (r, c) in &spec.coupling {
                let target = topology.flat_index(to_id(*r, "coupling")?).map_err(|_| {
                    Error::Validation(format!("coupling of agent {:?} names unknown agent {r:?}", spec.agent))
                })?;
                coupling[target] += c;
            }
            objectives[owner] = Some(QuadraticObjective::new(owner, spec.q, spec.b, coupling).into());
        }
        let objectives = objectives
            .into_iter()
            .enumerate()
            .map(|(a, o)| {
                o.ok_or_else(|| Error::Validation(format!("agent {} has no objective", topology.agent_id(a))))
            })
            .collect::<Result<Vec<_>>>()?;

        let per_agent = &self.resources.per_agent;
        if per_agent.len() != topology.num_coalitions() {
            return Err(Error::Validation(format!(
                "resources.per_agent lists {} coalitions, expected {}",
                per_agent.len(),
                topology.num_coalitions()
            )));
        }
        for (i, list) in per_agent.iter().enumerate() {
            if list.len() != topology.coalition_size(i) {
                return Err(Error::Validation(format!(
                    "resources.per_agent for coalition {} has {} entries, expected {}",
                    i + 1,
                    list.len(),
                    topology.coalition_size(i)
                )));
            }
        }
        let holdings = per_agent.iter().flatten().copied().collect();
        Game::new(topology, objectives, holdings, self.resources.coalition_totals.clone())
    }
}

/// Reads a scenario from a file, or from standard input when `path` is `-`.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin())?
    } else {
        std::fs::read_to_string(path)?
    };
    Scenario::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse_and_round_trip() {
        for name in BUILTIN_NAMES {
            let s = Scenario::from_json(builtin_scenario(name).unwrap()).unwrap();
            assert_eq!(s.name, name);
            assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
        }
        assert!(builtin_scenario("case3").is_none());
    }

    #[test]
    fn parse_errors_name_the_field() {
        let text = CASE1_JSON.replace("\"q\": 1,", "\"q\": \"one\",");
        let err = Scenario::from_json(&text).unwrap_err();
        assert!(matches!(&err, Error::Parse(msg) if msg.contains("objectives[0].q") && msg.contains("line")), "{err}");
    }

    #[test]
    fn unbalanced_resources_name_the_coalition() {
        let text = CASE1_JSON.replace("[30, 30, 30, 30, 30]", "[30, 30, 30, 30, 31]");
        let err = Scenario::from_json(&text).unwrap_err();
        assert!(matches!(&err, Error::Validation(msg) if msg.contains("coalition 2")), "{err}");
    }

    #[test]
    fn certified_step_keyword() {
        let text = CASE1_JSON.replace("\"step\": 0.02", "\"step\": \"certified\"");
        let s = Scenario::from_json(&text).unwrap();
        assert_eq!(s.algorithm.step, StepSpec::Keyword(StepKeyword::Certified));
    }

    #[test]
    fn zero_based_reference_rejected() {
        let text = CASE1_JSON.replacen("[[1, 1], [1, 2]]", "[[0, 1], [1, 2]]", 1);
        assert!(matches!(Scenario::from_json(&text), Err(Error::Validation(_))));
    }
}
