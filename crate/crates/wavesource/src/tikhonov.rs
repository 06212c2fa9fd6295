//! Tikhonov-regularized least squares for severely rank-deficient systems.
//!
//! Each frequency contributes one design block A^{(k)} whose kernel
//! cos²(2ν_k|x − y|) = ½ + ½cos(4ν_k(x − y)) spans only three functions of y,
//! so a single block has numerical rank 3 and a K-frequency stack rank
//! 1 + 2K. The minimizer of ‖Ax − h‖² + α‖x‖² is computed through the SVD
//! filter factors
//!
//! ```text
//! x_α = Σ_i  σ_i/(σ_i² + α) · (u_iᵀ h) · v_i,
//! ```
//!
//! which also yields the textbook perturbation bound
//! ‖x_α(h + e) − x_α(h)‖ ≤ ‖e‖/(2√α) used by the stability tests. A direct
//! normal-equations solver is included purely as an independent cross-check.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Relative cutoff under which a singular value counts as numerically zero:
/// σ < RANK_CUTOFF_FACTOR · σ_max.
pub const RANK_CUTOFF_FACTOR: f64 = 1e3 * f64::EPSILON;

/// Smallest regularization weight the heuristics will propose.
pub const MIN_ALPHA: f64 = 1e-14;

/// Thin singular value decomposition A = U·diag(σ)·Vᵀ with σ descending.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    u: DMatrix<f64>,
    sigma: DVector<f64>,
    v_t: DMatrix<f64>,
}

impl SvdFactors {
    pub fn singular_values(&self) -> &[f64] {
        self.sigma.as_slice()
    }

    /// Applies the Tikhonov filter factors σ/(σ² + α) to the data vector.
    pub fn solve(&self, h: &[f64], alpha: f64) -> Result<Vec<f64>> {
        check_alpha(alpha)?;
        if h.len() != self.u.nrows() {
            return Err(Error::Domain(format!(
                "data length {} does not match the {} matrix rows",
                h.len(),
                self.u.nrows()
            )));
        }
        let rhs = DVector::from_column_slice(h);
        let mut coeffs = self.u.transpose() * rhs;
        for (c, &s) in coeffs.iter_mut().zip(self.sigma.iter()) {
            *c *= s / (s * s + alpha);
        }
        Ok((self.v_t.transpose() * coeffs).as_slice().to_vec())
    }
}

/// Multi-frequency design: the per-frequency blocks and their row-wise stack.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub blocks: Vec<DMatrix<f64>>,
    pub stacked: DMatrix<f64>,
}

/// Regularized solution with the diagnostics of the solve that produced it.
#[derive(Debug, Clone)]
pub struct TikhonovSolution {
    pub mu_alpha: Vec<f64>,
    pub alpha: f64,
    pub residual_norm: f64,
    pub solution_norm: f64,
    /// σ_max/σ_min over the numerically non-zero spectrum; +∞ when the raw
    /// σ_min sits below the rank cutoff.
    pub condition_number: f64,
    /// Smallest singular value above the rank cutoff.
    pub sigma_min: f64,
    pub sigma_max: f64,
}

/// Spectrum summary of a design matrix.
#[derive(Debug, Clone, Copy)]
pub struct ConditionReport {
    pub sigma_max: f64,
    /// Raw smallest singular value reported by the decomposition.
    pub sigma_min_raw: f64,
    /// Smallest singular value above the rank cutoff (0 for a zero matrix).
    pub sigma_min_effective: f64,
    /// σ_max/σ_min_raw, or +∞ when σ_min_raw falls below the cutoff.
    pub kappa: f64,
    /// Number of singular values above the cutoff.
    pub effective_rank: usize,
    /// The absolute cutoff that was applied.
    pub cutoff: f64,
}

/// Computes the thin SVD, rejecting empty or non-finite input.
pub fn compute_svd(a: &DMatrix<f64>) -> Result<SvdFactors> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::Domain("cannot decompose an empty matrix".into()));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("matrix entries must be finite".into()));
    }
    let svd = nalgebra::SVD::try_new(a.clone(), true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Degenerate("singular value decomposition did not converge".into()))?;
    Ok(SvdFactors {
        u: svd.u.expect("requested U"),
        sigma: svd.singular_values,
        v_t: svd.v_t.expect("requested Vᵀ"),
    })
}

/// Stacks per-frequency blocks and their data row-wise into one system.
pub fn stack_frequencies(
    blocks: Vec<DMatrix<f64>>,
    data_blocks: &[Vec<f64>],
) -> Result<(DesignMatrix, Vec<f64>)> {
    if blocks.is_empty() {
        return Err(Error::Domain("need at least one frequency block".into()));
    }
    if blocks.len() != data_blocks.len() {
        return Err(Error::Domain(format!(
            "got {} design blocks but {} data blocks",
            blocks.len(),
            data_blocks.len()
        )));
    }
    let ncols = blocks[0].ncols();
    for (b, d) in blocks.iter().zip(data_blocks) {
        if b.ncols() != ncols {
            return Err(Error::Domain(format!(
                "all blocks must share a column count: {} vs {ncols}",
                b.ncols()
            )));
        }
        if b.nrows() != d.len() {
            return Err(Error::Domain(format!(
                "block with {} rows paired with {} data values",
                b.nrows(),
                d.len()
            )));
        }
    }
    let total_rows: usize = blocks.iter().map(DMatrix::nrows).sum();
    let mut stacked = DMatrix::zeros(total_rows, ncols);
    let mut offset = 0;
    for b in &blocks {
        stacked.view_mut((offset, 0), (b.nrows(), ncols)).copy_from(b);
        offset += b.nrows();
    }
    let data = data_blocks.concat();
    Ok((DesignMatrix { blocks, stacked }, data))
}

/// Solves min ‖Ax − h‖² + α‖x‖² through the SVD filter factors.
pub fn tikhonov_solve(a: &DMatrix<f64>, h: &[f64], alpha: f64) -> Result<TikhonovSolution> {
    let factors = compute_svd(a)?;
    solve_with_factors(a, &factors, h, alpha)
}

/// Same solve reusing a precomputed decomposition (for α sweeps).
pub fn solve_with_factors(
    a: &DMatrix<f64>,
    factors: &SvdFactors,
    h: &[f64],
    alpha: f64,
) -> Result<TikhonovSolution> {
    let x = factors.solve(h, alpha)?;
    let xv = DVector::from_column_slice(&x);
    let hv = DVector::from_column_slice(h);
    let residual_norm = (a * &xv - hv).norm();
    let report = spectrum_report(factors.singular_values());
    Ok(TikhonovSolution {
        solution_norm: xv.norm(),
        mu_alpha: x,
        alpha,
        residual_norm,
        condition_number: report.kappa,
        sigma_min: report.sigma_min_effective,
        sigma_max: report.sigma_max,
    })
}

/// Sweeps a list of regularization weights over one decomposition, returning
/// one solution per weight (the residual/solution norms trace the L-curve).
pub fn lcurve_sweep(
    a: &DMatrix<f64>,
    h: &[f64],
    alphas: &[f64],
) -> Result<Vec<TikhonovSolution>> {
    let factors = compute_svd(a)?;
    alphas.iter().map(|&al| solve_with_factors(a, &factors, h, al)).collect()
}

/// Summarizes the spectrum of a design matrix.
pub fn condition_diagnostics(a: &DMatrix<f64>) -> Result<ConditionReport> {
    let factors = compute_svd(a)?;
    Ok(spectrum_report(factors.singular_values()))
}

fn spectrum_report(sigma: &[f64]) -> ConditionReport {
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let sigma_min_raw = sigma.last().copied().unwrap_or(0.0);
    let cutoff = RANK_CUTOFF_FACTOR * sigma_max;
    let above: Vec<f64> = sigma.iter().copied().filter(|&s| s > cutoff).collect();
    let effective_rank = above.len();
    let sigma_min_effective = above.last().copied().unwrap_or(0.0);
    let kappa = if sigma_min_raw > cutoff && sigma_min_raw > 0.0 {
        sigma_max / sigma_min_raw
    } else {
        f64::INFINITY
    };
    ConditionReport { sigma_max, sigma_min_raw, sigma_min_effective, kappa, effective_rank, cutoff }
}

/// Proposes α = c·δ from the noise level δ, floored at [`MIN_ALPHA`] so the
/// noise-free limit stays solvable.
pub fn choose_alpha(delta: f64, c: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::Domain(format!("noise level must be non-negative, got {delta}")));
    }
    if !(c > 0.0) {
        return Err(Error::Domain(format!("proportionality constant must be positive, got {c}")));
    }
    Ok((c * delta).max(MIN_ALPHA))
}

/// Projects a reconstruction onto the physical cone μ ≥ 0.
pub fn clamp_nonnegative(values: &[f64]) -> Vec<f64> {
    values.iter().map(|&v| v.max(0.0)).collect()
}

/// Independent cross-check: solves (AᵀA + αI)x = Aᵀh by Cholesky. Slower and
/// squares the conditioning; kept only to validate the SVD path.
pub fn normal_equations_solve(a: &DMatrix<f64>, h: &[f64], alpha: f64) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if h.len() != a.nrows() {
        return Err(Error::Domain(format!(
            "data length {} does not match the {} matrix rows",
            h.len(),
            a.nrows()
        )));
    }
    let at = a.transpose();
    let mut lhs = &at * a;
    for i in 0..lhs.nrows() {
        lhs[(i, i)] += alpha;
    }
    let rhs = &at * DVector::from_column_slice(h);
    let chol = nalgebra::Cholesky::new(lhs)
        .ok_or_else(|| Error::Degenerate("regularized normal matrix is not positive definite".into()))?;
    Ok(chol.solve(&rhs).as_slice().to_vec())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!(
            "regularization weight must be positive and finite, got {alpha}"
        )));
    }
    Ok(())
}
