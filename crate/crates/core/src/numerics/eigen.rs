//! Cyclic Jacobi eigensolver for real symmetric matrices.

use super::DenseMatrix;
use crate::error::{Error, Result};

/// Symmetry tolerance accepted on input.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Off-diagonal Frobenius mass (relative to ‖S‖_F) at which sweeps stop.
pub const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors
/// (column `k` of `vectors` belongs to `values[k]`).
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

fn check_symmetric(s: &DenseMatrix) -> Result<()> {
    if !s.is_square() {
        return Err(Error::InvalidArgument(format!(
            "eigensolver expects a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    if !s.is_finite() {
        return Err(Error::NonFinite("eigensolver input".into()));
    }
    let asymmetry = s.asymmetry();
    if asymmetry > SYMMETRY_TOL * s.max_abs().max(1.0) {
        return Err(Error::NotSymmetric { asymmetry });
    }
    Ok(())
}

fn off_diagonal_mass(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// Full eigendecomposition by cyclic Jacobi rotations.
pub fn symmetric_eigen(s: &DenseMatrix) -> Result<SymmetricEigen> {
    check_symmetric(s)?;
    let n = s.rows();
    let mut a = s.symmetrized();
    let mut v = DenseMatrix::identity(n);
    let threshold = OFF_DIAGONAL_TOL * a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_mass(&a) <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;

                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    let new_rp = c * arp - sn * arq;
                    let new_rq = sn * arp + c * arq;
                    a[(r, p)] = new_rp;
                    a[(p, r)] = new_rp;
                    a[(r, q)] = new_rq;
                    a[(q, r)] = new_rq;
                }
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = c * vrp - sn * vrq;
                    v[(r, q)] = sn * vrp + c * vrq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |r, k| v[(r, order[k])]);
    Ok(SymmetricEigen { values, vectors })
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(s: &DenseMatrix) -> Result<Vec<f64>> {
    Ok(symmetric_eigen(s)?.values)
}

/// λ₂(L²): the smallest non-zero eigenvalue of the square of a connected
/// Laplacian, i.e. the square of the algebraic connectivity of `laplacian`.
pub fn lambda2_of_square(laplacian: &DenseMatrix) -> Result<f64> {
    let values = symmetric_eigenvalues(laplacian)?;
    let norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let zero_tol = 1e-9 * norm;
    let zeros = values.iter().filter(|v| v.abs() <= zero_tol).count();
    if zeros == values.len() {
        return Err(Error::NoNonzeroEigenvalue);
    }
    if zeros > 1 {
        return Err(Error::MultipleZeroEigenvalues { count: zeros });
    }
    let smallest_nonzero = values
        .iter()
        .copied()
        .filter(|v| v.abs() > zero_tol)
        .fold(f64::INFINITY, |m, v| m.min(v.abs()));
    Ok(smallest_nonzero * smallest_nonzero)
}

/// Largest singular value, from the top eigenvalue of `mᵀm`.
pub fn spectral_norm(m: &DenseMatrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    // Use the smaller Gram matrix; both share the non-zero spectrum.
    let gram = if m.cols() <= m.rows() {
        m.transpose_matmul(m)
    } else {
        m.matmul(&m.transpose())
    };
    let top = symmetric_eigenvalues(&gram)
        .expect("Gram matrix is symmetric and finite")
        .last()
        .copied()
        .unwrap_or(0.0);
    top.max(0.0).sqrt()
}
