//! Distributed Nash-equilibrium seeking for games played between coalitions
//! of cooperating agents over a communication network.

#![allow(clippy::needless_range_loop)]

pub mod engine;
pub mod error;
pub mod game;
pub mod harness;
pub mod numerics;
pub mod topology;

pub use engine::{Algorithm, RunOptions, StepSizeCertificate, Trajectory};
pub use error::{Error, Result};
pub use game::{Game, GameConstants, GameKind};
pub use topology::{AgentId, NetworkTopology};
