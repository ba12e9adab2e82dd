use serde::{Deserialize, Serialize};

use super::Game;
use crate::error::{Error, Result};
use crate::numerics::{norm_inf, solve_linear, DenseMatrix};

/// Iteration cap of the projected fixed-point oracle.
pub const GENERIC_MAX_ITERS: usize = 1_000_000;

/// Coalition-sum tolerance for a point to count as admissible.
pub const CONSTRAINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeResult {
    pub x_star: Vec<f64>,
    /// `max_i ‖L_i ∂f_i/∂x_i(x)‖_∞`.
    pub kkt_residual: f64,
    /// `max_i |1ᵀx_i − R_i|`.
    pub constraint_residual: f64,
    pub passed: bool,
}

/// Residuals of the equilibrium conditions at `x`.
pub fn verify_ne(game: &Game, x: &[f64], tol: f64) -> Result<NeResult> {
    let kkt_residual = game.kkt_residual(x)?;
    let constraint_residual = game.constraint_residual(x);
    Ok(NeResult {
        x_star: x.to_vec(),
        kkt_residual,
        constraint_residual,
        passed: kkt_residual <= tol && constraint_residual <= CONSTRAINT_TOL,
    })
}

/// Computes the equilibrium: a direct KKT solve for quadratic games, a projected
/// pseudo-gradient iteration otherwise.
pub fn solve_ne(game: &Game, tol: f64) -> Result<NeResult> {
    let x = if game.is_quadratic() {
        solve_kkt(game)?
    } else {
        projected_iteration(game, tol)?
    };
    verify_ne(game, &x, tol)
}

/// Solves `[J E; Eᵀ 0][x; λ] = [−g; R]` where `E` selects coalition membership.
fn solve_kkt(game: &Game) -> Result<Vec<f64>> {
    let t = game.topology();
    let n = t.n_sum();
    let m = n + t.num_coalitions();
    let (j, g) = game.affine_pseudo_gradient()?;
    let mut k = DenseMatrix::zeros(m, m);
    let mut rhs = vec![0.0; m];
    for a in 0..n {
        k.row_mut(a)[..n].copy_from_slice(j.row(a));
        rhs[a] = -g[a];
        let c = n + t.coalition_of(a);
        k[(a, c)] = 1.0;
        k[(c, a)] = 1.0;
    }
    for (i, r) in game.resources().iter().enumerate() {
        rhs[n + i] = *r;
    }
    let sol = solve_linear(&k, &rhs).map_err(|e| match e {
        Error::SingularSystem => Error::SingularKkt,
        other => other,
    })?;
    Ok(sol[..n].to_vec())
}

/// `x ← Π_Ω(x − s P(x))` with `s = μ / (Σ_i l_i)²`.
fn projected_iteration(game: &Game, tol: f64) -> Result<Vec<f64>> {
    let constants = game.compute_constants()?;
    let l_total: f64 = constants.l_coalition.iter().sum();
    let s = constants.mu / (l_total * l_total);
    let t = game.topology();
    let mut x = game.holdings().to_vec();
    for _ in 0..GENERIC_MAX_ITERS {
        let p = game.pseudo_gradient(&x)?;
        let mut next: Vec<f64> = x.iter().zip(&p).map(|(xi, pi)| xi - s * pi).collect();
        for (i, r) in game.resources().iter().enumerate() {
            let range = t.coalition_range(i);
            let shift = (r - next[range.clone()].iter().sum::<f64>()) / range.len() as f64;
            for v in &mut next[range] {
                *v += shift;
            }
        }
        let step: Vec<f64> = next.iter().zip(&x).map(|(a, b)| a - b).collect();
        x = next;
        if norm_inf(&step) < tol {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence {
        iterations: GENERIC_MAX_ITERS,
    })
}
