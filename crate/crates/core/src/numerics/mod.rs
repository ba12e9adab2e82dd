//! Dense linear-algebra kernels used by the step-size certificates.

mod eigen;
mod linsolve;
mod lyapunov;
mod matrix;

pub use eigen::{
    lambda2_of_square, spectral_norm, symmetric_eigen, symmetric_eigenvalues, SymmetricEigen,
    OFF_DIAGONAL_TOL, SYMMETRY_TOL,
};
pub use linsolve::solve_linear;
pub use lyapunov::{
    lyapunov_residual, solve_discrete_lyapunov, solve_discrete_lyapunov_neumann,
    solve_discrete_lyapunov_vectorized, LyapunovSolution, DENSE_VECTORIZED_MAX, NEUMANN_TAIL_TOL,
    RESIDUAL_TOL,
};
pub use matrix::DenseMatrix;

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
