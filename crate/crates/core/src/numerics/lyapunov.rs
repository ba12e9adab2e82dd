//! Discrete Lyapunov equation `Mᵀ W M − W = −I`.

use serde::Serialize;

use super::{solve_linear, symmetric_eigenvalues, DenseMatrix};
use crate::error::{Error, Result};

/// Residual bound a solution must meet.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Largest order handled by the vectorized Kronecker solve.
pub const DENSE_VECTORIZED_MAX: usize = 30;
/// Truncation of the Neumann series: stop once ‖Mᵏ‖_F² drops below this.
pub const NEUMANN_TAIL_TOL: f64 = 1e-12;
const MAX_DOUBLINGS: usize = 64;

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovSolution {
    pub w: DenseMatrix,
    pub residual_norm: f64,
}

/// `‖Mᵀ W M − W + I‖_max`.
pub fn lyapunov_residual(m: &DenseMatrix, w: &DenseMatrix) -> f64 {
    let mtwm = m.transpose_matmul(&w.matmul(m));
    let n = m.rows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((mtwm[(i, j)] - w[(i, j)] + id).abs());
        }
    }
    worst
}

fn check_square(m: &DenseMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidArgument(format!(
            "Lyapunov solve expects a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("Lyapunov input".into()));
    }
    Ok(())
}

fn finish(m: &DenseMatrix, w: DenseMatrix) -> Result<LyapunovSolution> {
    let w = w.symmetrized();
    let residual_norm = lyapunov_residual(m, &w);
    if !residual_norm.is_finite() || residual_norm >= RESIDUAL_TOL {
        return Err(Error::NotSchur(format!("Lyapunov residual {residual_norm:e}")));
    }
    // A Schur M yields W ⪰ I; an indefinite W means M was not Schur.
    let smallest = symmetric_eigenvalues(&w)?.first().copied().unwrap_or(1.0);
    if smallest <= 0.0 {
        return Err(Error::NotSchur(format!("Lyapunov solution not positive definite (λ_min = {smallest:e})")));
    }
    Ok(LyapunovSolution { w, residual_norm })
}

/// Solves `(I ⊗ I − Mᵀ ⊗ Mᵀ) vec(W) = vec(I)` by dense elimination.
///
/// O(n⁶); intended for small matrices and as a cross-check.
pub fn solve_discrete_lyapunov_vectorized(m: &DenseMatrix) -> Result<LyapunovSolution> {
    check_square(m)?;
    let n = m.rows();
    let nn = n * n;
    // Row index (i, j) of vec(W) in row-major order: (MᵀWM)_ij = Σ_kl m_ki w_kl m_lj.
    let mut system = DenseMatrix::identity(nn);
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for k in 0..n {
                let mki = m[(k, i)];
                if mki == 0.0 {
                    continue;
                }
                for l in 0..n {
                    system[(row, k * n + l)] -= mki * m[(l, j)];
                }
            }
        }
    }
    let rhs = DenseMatrix::identity(n).as_slice().to_vec();
    let sol = solve_linear(&system, &rhs).map_err(|_| Error::NotSchur("singular Kronecker system".into()))?;
    finish(m, DenseMatrix::from_row_major(n, n, sol))
}

/// Truncated Neumann series `W = Σ_k (Mᵀ)ᵏ Mᵏ`, summed by repeated doubling:
/// `W ← W + (P)ᵀ W P`, `P ← P²` with `P = M^(2^j)`.
pub fn solve_discrete_lyapunov_neumann(m: &DenseMatrix) -> Result<LyapunovSolution> {
    check_square(m)?;
    let n = m.rows();
    let mut w = DenseMatrix::identity(n);
    let mut power = m.clone();
    for _ in 0..MAX_DOUBLINGS {
        let tail = power.frobenius_norm().powi(2);
        if !tail.is_finite() || tail > 1e200 {
            return Err(Error::NotSchur("Neumann series diverges".into()));
        }
        if tail < NEUMANN_TAIL_TOL {
            return finish(m, w);
        }
        let update = power.transpose_matmul(&w.matmul(&power));
        w = w.add(&update);
        power = power.matmul(&power);
    }
    Err(Error::NotSchur(format!(
        "Neumann series not converged after 2^{MAX_DOUBLINGS} terms"
    )))
}

/// Solves `Mᵀ W M − W = −I` for a Schur-stable `M`.
///
/// Small matrices go through the vectorized elimination, larger ones through
/// the Neumann series.
pub fn solve_discrete_lyapunov(m: &DenseMatrix) -> Result<LyapunovSolution> {
    if m.rows() <= DENSE_VECTORIZED_MAX {
        solve_discrete_lyapunov_vectorized(m)
    } else {
        solve_discrete_lyapunov_neumann(m)
    }
}
