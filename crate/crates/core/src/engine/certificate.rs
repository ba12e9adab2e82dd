//! Step-size bounds that guarantee linear convergence, and the constants behind them.

use serde::Serialize;

use super::Algorithm;
use crate::error::{Error, Result};
use crate::game::{Game, GameConstants};
use crate::numerics::{lambda2_of_square, solve_discrete_lyapunov, spectral_norm, DenseMatrix};
use crate::topology::NetworkTopology;

/// Lyapunov data of the estimation operator `M`, solved block by block.
///
/// `M` is permutation-similar to `⊕_p (W + diag_a w̄_a^p)`, so its Lyapunov
/// solution is the direct sum of the per-target solutions and every spectral
/// norm below is the maximum over targets.
#[derive(Debug, Clone, Serialize)]
pub struct ConsensusLyapunov {
    /// `‖W_M‖`.
    pub w_m_norm: f64,
    /// `‖Mᵀ W_M‖`.
    pub mtw_m_norm: f64,
    /// `‖I − M‖`.
    pub i_minus_m_norm: f64,
    /// Largest absolute row sum of `M`.
    pub max_row_sum: f64,
    /// Largest Lyapunov residual over the blocks.
    pub residual: f64,
    #[serde(skip)]
    pub blocks: Vec<DenseMatrix>,
}

impl ConsensusLyapunov {
    pub fn compute(topology: &NetworkTopology) -> Result<Self> {
        let n = topology.n_sum();
        let mut out = Self {
            w_m_norm: 0.0,
            mtw_m_norm: 0.0,
            i_minus_m_norm: 0.0,
            max_row_sum: topology.consensus_row_sums().into_iter().fold(0.0, f64::max),
            residual: 0.0,
            blocks: Vec::with_capacity(n),
        };
        for p in 0..n {
            let block = topology.consensus_block(p);
            let sol = solve_discrete_lyapunov(&block)
                .map_err(|e| Error::NotSchur(format!("estimation block for target {p}: {e}")))?;
            out.w_m_norm = out.w_m_norm.max(spectral_norm(&sol.w));
            out.mtw_m_norm = out.mtw_m_norm.max(spectral_norm(&block.transpose_matmul(&sol.w)));
            out.i_minus_m_norm = out
                .i_minus_m_norm
                .max(spectral_norm(&DenseMatrix::identity(n).sub(&block)));
            out.residual = out.residual.max(sol.residual_norm);
            out.blocks.push(sol.w);
        }
        Ok(out)
    }

    /// `e_ξᵀ W_M e_ξ` for an agent-major estimation error.
    pub fn quadratic_form(&self, e_xi: &[f64]) -> f64 {
        let n = self.blocks.len();
        let mut column = vec![0.0; n];
        self.blocks
            .iter()
            .enumerate()
            .map(|(p, w)| {
                for (a, c) in column.iter_mut().enumerate() {
                    *c = e_xi[a * n + p];
                }
                w.quadratic_form(&column)
            })
            .sum()
    }
}

/// Lyapunov data of one coalition's centred mixing matrix `C̄_i = C_i − 11ᵀ/n_i`.
#[derive(Debug, Clone, Serialize)]
pub struct TrackingLyapunov {
    /// `‖W_{c_i}‖`.
    pub w_c_norm: f64,
    /// `‖C̄_iᵀ W_{c_i} Ī_i‖`.
    pub cbar_w_ibar_norm: f64,
    /// `‖Ī_iᵀ W_{c_i} Ī_i‖`.
    pub ibar_w_ibar_norm: f64,
    /// `‖C̄_i‖`.
    pub cbar_norm: f64,
    #[serde(skip)]
    pub w_c: DenseMatrix,
}

impl TrackingLyapunov {
    pub fn compute(mixing: &DenseMatrix) -> Result<Self> {
        let n = mixing.rows();
        let centre = DenseMatrix::from_fn(n, n, |_, _| 1.0 / n as f64);
        let cbar = mixing.sub(&centre);
        let ibar = DenseMatrix::identity(n).sub(&centre);
        let sol = solve_discrete_lyapunov(&cbar)?;
        let w_ibar = sol.w.matmul(&ibar);
        Ok(Self {
            w_c_norm: spectral_norm(&sol.w),
            cbar_w_ibar_norm: spectral_norm(&cbar.transpose_matmul(&w_ibar)),
            ibar_w_ibar_norm: spectral_norm(&ibar.transpose_matmul(&w_ibar)),
            cbar_norm: spectral_norm(&cbar),
            w_c: sol.w,
        })
    }
}

/// All constants of a convergence certificate together with the resulting bound.
#[derive(Debug, Clone, Serialize)]
pub struct StepSizeCertificate {
    pub mode: Algorithm,
    pub constants: GameConstants,
    /// Estimation weight `γ` of the estimation-only scheme.
    pub gamma: Option<f64>,
    pub b: f64,
    pub gamma_psi: Option<f64>,
    pub gamma_xi: Option<f64>,
    pub consensus: ConsensusLyapunov,
    /// Per-coalition tracking data (gradient-tracking scheme only).
    pub tracking: Vec<TrackingLyapunov>,
    /// `max_i ‖W_{c_i}‖`.
    pub w_c_norm: Option<f64>,
    pub laplacian_norms: Vec<f64>,
    /// `‖L_i L̆_i‖` per coalition.
    pub laplacian_product_norms: Vec<f64>,
    /// `‖L̆_i‖` per coalition.
    pub row_laplacian_norms: Vec<f64>,
    /// `λ₂(L_i²)` for every coalition with more than one member.
    pub lambda2_lsq: Vec<f64>,
    /// Sizes of the coalitions listed in `lambda2_lsq`.
    pub coalition_sizes: Vec<usize>,
    /// The individual terms whose minimum is the bound.
    pub bound_terms: Vec<f64>,
    pub bound: f64,
    /// Guaranteed contraction factor `ε` per iteration at `step = bound`.
    pub rate: f64,
}

impl StepSizeCertificate {
    /// Contraction factor the certificate guarantees at a given step no larger than the bound.
    pub fn rate_at(&self, step: f64) -> f64 {
        let mu = self.constants.mu;
        let w_m = 1.0 / (8.0 * self.consensus.w_m_norm);
        match self.mode {
            Algorithm::Special => {
                let lam = self.lambda2_lsq.iter().copied().fold(f64::INFINITY, f64::min);
                w_m.min(0.5 * mu * step * lam)
            }
            Algorithm::General => {
                let lam = self
                    .lambda2_lsq
                    .iter()
                    .zip(&self.coalition_sizes)
                    .map(|(l, n)| l / *n as f64)
                    .fold(f64::INFINITY, f64::min);
                let w_c = 1.0 / (8.0 * self.w_c_norm.unwrap_or(0.0));
                (0.5 * mu * step * lam).min(w_c).min(w_m)
            }
        }
    }

    /// Whether `step` lies within the certified range.
    pub fn admits(&self, step: f64) -> bool {
        step > 0.0 && step <= self.bound
    }
}

struct CommonData {
    constants: GameConstants,
    consensus: ConsensusLyapunov,
    b: f64,
    laplacian_norms: Vec<f64>,
    lambda2_lsq: Vec<f64>,
    coalition_sizes: Vec<usize>,
}

fn common(game: &Game) -> Result<CommonData> {
    let t = game.topology();
    let constants = game.compute_constants()?;
    let laplacian_norms: Vec<f64> = t.laplacians().iter().map(spectral_norm).collect();
    if laplacian_norms.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateTopology(
            "every coalition has a single member, so no resource can move".into(),
        ));
    }
    // Single-member coalitions have nothing to balance and are left out of the minimum.
    let lambda2_lsq = t
        .laplacians()
        .iter()
        .filter(|l| l.rows() > 1)
        .map(lambda2_of_square)
        .collect::<Result<Vec<_>>>()?;
    let coalition_sizes = t.coalition_sizes().iter().copied().filter(|&n| n > 1).collect();
    let consensus = ConsensusLyapunov::compute(t)?;
    let b = t.n_sum() as f64 * (2.0 * consensus.mtw_m_norm.powi(2) + consensus.w_m_norm);
    Ok(CommonData {
        constants,
        consensus,
        b,
        laplacian_norms,
        lambda2_lsq,
        coalition_sizes,
    })
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

fn finish(mut cert: StepSizeCertificate) -> Result<StepSizeCertificate> {
    let bound = cert.bound_terms.iter().copied().fold(f64::INFINITY, f64::min);
    if !(bound > 0.0 && bound.is_finite()) {
        return Err(Error::DegenerateTopology(format!("step-size bound evaluates to {bound}")));
    }
    cert.bound = bound;
    cert.rate = cert.rate_at(bound);
    Ok(cert)
}

/// Largest certified step of the estimation-only scheme.
pub fn alpha_bound(game: &Game) -> Result<StepSizeCertificate> {
    let c = common(game)?;
    let mu = c.constants.mu;
    let li = &c.constants.l_coalition;
    let ln = &c.laplacian_norms;
    let li2_ln2: Vec<f64> = (0..li.len()).map(|i| li[i].powi(2) * ln[i].powi(2)).collect();
    let gamma = 4.0 * li2_ln2.iter().copied().fold(0.0, f64::max);
    let max_li2_ln4 = (0..li.len()).map(|i| li[i].powi(2) * ln[i].powi(4)).fold(0.0, f64::max);
    let bound_terms = vec![
        ratio(gamma, 8.0 * mu * max_li2_ln4),
        ratio(mu, 2.0 * li2_ln2.iter().sum::<f64>() + gamma * c.b),
    ];
    finish(StepSizeCertificate {
        mode: Algorithm::Special,
        gamma: Some(gamma),
        b: c.b,
        gamma_psi: None,
        gamma_xi: None,
        tracking: Vec::new(),
        w_c_norm: None,
        laplacian_product_norms: Vec::new(),
        row_laplacian_norms: Vec::new(),
        bound_terms,
        bound: 0.0,
        rate: 0.0,
        constants: c.constants,
        consensus: c.consensus,
        laplacian_norms: c.laplacian_norms,
        lambda2_lsq: c.lambda2_lsq,
        coalition_sizes: c.coalition_sizes,
    })
}

/// Largest certified step of the gradient-tracking scheme.
pub fn beta_bound(game: &Game) -> Result<StepSizeCertificate> {
    let t = game.topology();
    let c = common(game)?;
    let mu = c.constants.mu;
    let li = &c.constants.l_coalition;
    let ln = &c.laplacian_norms;
    let sizes: Vec<f64> = t.coalition_sizes().iter().map(|&n| n as f64).collect();
    let sum_lij2: Vec<f64> = (0..t.num_coalitions())
        .map(|i| t.coalition_range(i).map(|a| c.constants.l_agent[a].powi(2)).sum())
        .collect();

    let row_laplacian_norms: Vec<f64> = t.row_laplacians().iter().map(spectral_norm).collect();
    let laplacian_product_norms: Vec<f64> = t
        .laplacians()
        .iter()
        .zip(t.row_laplacians())
        .map(|(l, lr)| spectral_norm(&l.matmul(lr)))
        .collect();
    let tracking = t
        .mixing_matrices()
        .iter()
        .map(TrackingLyapunov::compute)
        .collect::<Result<Vec<_>>>()?;
    let w_c_norm = tracking.iter().map(|d| d.w_c_norm).fold(0.0, f64::max);

    let gamma_psi = 4.0
        * (0..sizes.len())
            .map(|i| sizes[i] * row_laplacian_norms[i].powi(2))
            .fold(0.0, f64::max);
    let tracking_gain = (0..sizes.len())
        .flat_map(|i| {
            let d = &tracking[i];
            let factor = 2.0 * d.cbar_w_ibar_norm.powi(2) + d.ibar_w_ibar_norm;
            t.coalition_range(i).map(move |a| (a, factor))
        })
        .map(|(a, factor)| factor * c.constants.l_agent[a].powi(2))
        .fold(0.0, f64::max);
    let gradient_gain = (0..sizes.len())
        .map(|i| sum_lij2[i] * ln[i].powi(2) / sizes[i])
        .fold(0.0, f64::max);
    let gamma_xi =
        4.0 * (gradient_gain + 2.0 * gamma_psi * tracking_gain * c.consensus.i_minus_m_norm.powi(2));

    let scaled_sum: f64 = (0..sizes.len()).map(|i| li[i].powi(2) * ln[i].powi(2) / sizes[i]).sum();
    let max_product = laplacian_product_norms.iter().map(|v| v * v).fold(0.0, f64::max);
    let max_quartic = (0..sizes.len())
        .map(|i| ln[i].powi(4) * sum_lij2[i] / sizes[i].powi(2))
        .fold(0.0, f64::max);
    let bound_terms = vec![
        ratio(mu, 2.0 * (scaled_sum + gamma_xi * c.b)),
        ratio(gamma_psi, 8.0 * mu * max_product),
        ratio(gamma_xi, 8.0 * mu * max_quartic),
    ];
    finish(StepSizeCertificate {
        mode: Algorithm::General,
        gamma: None,
        b: c.b,
        gamma_psi: Some(gamma_psi),
        gamma_xi: Some(gamma_xi),
        tracking,
        w_c_norm: Some(w_c_norm),
        laplacian_product_norms,
        row_laplacian_norms,
        bound_terms,
        bound: 0.0,
        rate: 0.0,
        constants: c.constants,
        consensus: c.consensus,
        laplacian_norms: c.laplacian_norms,
        lambda2_lsq: c.lambda2_lsq,
        coalition_sizes: c.coalition_sizes,
    })
}

/// Certificate for the given scheme.
pub fn certify(game: &Game, algorithm: Algorithm) -> Result<StepSizeCertificate> {
    match algorithm {
        Algorithm::Special => alpha_bound(game),
        Algorithm::General => beta_bound(game),
    }
}
