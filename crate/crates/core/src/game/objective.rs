use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::numerics::DenseMatrix;

/// A continuously differentiable cost evaluated on the full decision vector.
pub trait SmoothObjective: Send + Sync + fmt::Debug {
    fn value(&self, x: &[f64]) -> f64;

    /// `∂f/∂x_target` at `x`.
    fn partial(&self, target: usize, x: &[f64]) -> f64;

    /// Whether the value can change with `x_target`, as a structural property.
    fn depends_on(&self, target: usize) -> bool;
}

/// `f(x) = q (x_o − b)² + ½ x_o ⟨c, x⟩` for owner index `o`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticObjective {
    pub owner: usize,
    pub q: f64,
    pub b: f64,
    /// Dense coupling vector `c`, one entry per agent; `c[owner]` must be zero.
    pub coupling: Vec<f64>,
}

impl QuadraticObjective {
    pub fn new(owner: usize, q: f64, b: f64, coupling: Vec<f64>) -> Self {
        Self { owner, q, b, coupling }
    }

    /// Decoupled `q (x_o − b)²` on `n` agents.
    pub fn decoupled(owner: usize, n: usize, q: f64, b: f64) -> Self {
        Self::new(owner, q, b, vec![0.0; n])
    }

    fn coupling_dot(&self, x: &[f64]) -> f64 {
        self.coupling.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Constant Hessian.
    pub fn hessian(&self) -> DenseMatrix {
        let n = self.coupling.len();
        let o = self.owner;
        let mut h = DenseMatrix::zeros(n, n);
        h[(o, o)] = 2.0 * self.q;
        for r in 0..n {
            h[(o, r)] += 0.5 * self.coupling[r];
            h[(r, o)] += 0.5 * self.coupling[r];
        }
        h
    }
}

impl SmoothObjective for QuadraticObjective {
    fn value(&self, x: &[f64]) -> f64 {
        let xo = x[self.owner];
        self.q * (xo - self.b).powi(2) + 0.5 * xo * self.coupling_dot(x)
    }

    fn partial(&self, target: usize, x: &[f64]) -> f64 {
        let xo = x[self.owner];
        let cross = 0.5 * xo * self.coupling[target];
        if target == self.owner {
            2.0 * self.q * (xo - self.b) + 0.5 * self.coupling_dot(x) + cross
        } else {
            cross
        }
    }

    fn depends_on(&self, target: usize) -> bool {
        target == self.owner || self.coupling[target] != 0.0
    }
}

/// Per-agent objective: the closed quadratic family or a user-supplied function.
#[derive(Debug, Clone)]
pub enum Objective {
    Quadratic(QuadraticObjective),
    Custom(Arc<dyn SmoothObjective>),
}

impl Objective {
    pub fn as_quadratic(&self) -> Option<&QuadraticObjective> {
        match self {
            Objective::Quadratic(q) => Some(q),
            Objective::Custom(_) => None,
        }
    }

    fn inner(&self) -> &dyn SmoothObjective {
        match self {
            Objective::Quadratic(q) => q,
            Objective::Custom(c) => c.as_ref(),
        }
    }
}

impl SmoothObjective for Objective {
    fn value(&self, x: &[f64]) -> f64 {
        self.inner().value(x)
    }

    fn partial(&self, target: usize, x: &[f64]) -> f64 {
        self.inner().partial(target, x)
    }

    fn depends_on(&self, target: usize) -> bool {
        self.inner().depends_on(target)
    }
}

impl From<QuadraticObjective> for Objective {
    fn from(q: QuadraticObjective) -> Self {
        Objective::Quadratic(q)
    }
}
