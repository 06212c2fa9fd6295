//! Recovery of the source amplitudes f and g from ensemble statistics.
//!
//! With modal data U_k(T) from the Lévy-driven wave model, the first two
//! moments separate the two unknowns:
//!
//! ```text
//! E U_k          = f_k·D_k + b·g_k·Q_k,          D_k = Σ_j h(t_j)A_k(t_j)Δt,
//! Cov(U_k, U_l)  = γ·g_k·g_l·I_kl + σ_ε²Δx·δ_kl,  I_kl = ∫₀ᵀ A_k A_l dt,
//! ```
//!
//! where γ = σ² + λ_p·σ_J² is the driver's noise intensity and σ_ε²Δx is the
//! floor the pointwise measurement noise leaves on the modal covariance. The
//! mean equation gives f̂_k by division; the covariance equation determines g
//! only up to a global sign (C is even in g), so the quadratic fit is seeded
//! mode-by-mode from the diagonal and disambiguated by a [`SignPolicy`].
//! D_k and Q_k deliberately use the same left-endpoint rectangle sums as the
//! forward simulation, so the discretizations cancel instead of stacking.

use crate::error::{Error, Result};
use crate::grid_basis::{Grid, SineBasis};
use crate::levy_forward::{kernel_a, LevyParams, ModalStats};
use nalgebra::{DMatrix, DVector};

/// Modes whose forcing integral is smaller than this are unrecoverable from
/// the mean equation.
pub const MIN_FORCING: f64 = 1e-8;

/// Modes whose kernel energy is smaller than this are unrecoverable from the
/// covariance equation.
pub const MIN_KERNEL_ENERGY: f64 = 1e-10;

/// Time-integrated kernel quantities shared by both inversion formulas.
#[derive(Debug, Clone)]
pub struct TimeKernelMatrix {
    t_horizon: f64,
    /// I_kl = ∫₀ᵀ A_k(t)A_l(t) dt, closed form.
    i_matrix: DMatrix<f64>,
    /// D_k = Σ_j h(t_j)A_k(t_j)Δt, rectangle rule on h's own time grid.
    d: Vec<f64>,
    /// Q_k = Σ_j A_k(t_j)Δt, the drift weight (h ≡ 1 version of D).
    q: Vec<f64>,
}

impl TimeKernelMatrix {
    /// Integrates the Duhamel kernels of all basis modes against `h_values`
    /// (uniform time grid on [0, T] with `h_values.len() − 1` steps).
    pub fn new(basis: &SineBasis, t_horizon: f64, h_values: &[f64]) -> Result<Self> {
        if !(t_horizon > 0.0) || !t_horizon.is_finite() {
            return Err(Error::Domain(format!(
                "time horizon must be positive and finite, got {t_horizon}"
            )));
        }
        if h_values.len() < 2 {
            return Err(Error::Domain("h needs at least two time nodes (one step)".into()));
        }
        let k_modes = basis.modes();
        let omegas: Vec<f64> = (1..=k_modes).map(|k| basis.frequency(k)).collect::<Result<_>>()?;
        let i_matrix = DMatrix::from_fn(k_modes, k_modes, |r, c| {
            compute_i(omegas[r], omegas[c], t_horizon)
        });
        let ones = vec![1.0; h_values.len()];
        let d = omegas.iter().map(|&w| compute_d(w, h_values, t_horizon)).collect::<Result<_>>()?;
        let q = omegas.iter().map(|&w| compute_d(w, &ones, t_horizon)).collect::<Result<_>>()?;
        Ok(TimeKernelMatrix { t_horizon, i_matrix, d, q })
    }

    pub fn t_horizon(&self) -> f64 {
        self.t_horizon
    }

    pub fn k_modes(&self) -> usize {
        self.d.len()
    }

    pub fn i_matrix(&self) -> &DMatrix<f64> {
        &self.i_matrix
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }
}

/// Exact value of I_kl = ∫₀ᵀ sin(ω_k(T−t))sin(ω_l(T−t))/(ω_k ω_l) dt.
pub fn compute_i(omega_k: f64, omega_l: f64, t_horizon: f64) -> f64 {
    let (a, b, t) = (omega_k, omega_l, t_horizon);
    if (a - b).abs() <= 1e-12 * a.abs().max(b.abs()) {
        (t / 2.0 - (2.0 * a * t).sin() / (4.0 * a)) / (a * a)
    } else {
        let half = |m: f64| (m * t).sin() / m;
        (half(a - b) - half(a + b)) / (2.0 * a * b)
    }
}

/// Rectangle-rule forcing integral D = Σ_{j<n} h(t_j)·A(t_j)·Δt on the
/// uniform time grid carrying `h_values` — the same sum the simulation uses,
/// so forward and inverse discretizations cancel exactly.
pub fn compute_d(omega: f64, h_values: &[f64], t_horizon: f64) -> Result<f64> {
    if h_values.len() < 2 {
        return Err(Error::Domain("h needs at least two time nodes (one step)".into()));
    }
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("mode frequency must be positive, got {omega}")));
    }
    let n_steps = h_values.len() - 1;
    let dt = t_horizon / n_steps as f64;
    Ok(h_values[..n_steps]
        .iter()
        .enumerate()
        .map(|(j, &h)| h * kernel_a(omega, j as f64 * dt, t_horizon))
        .sum::<f64>()
        * dt)
}

/// Resolution of the global sign the covariance cannot see.
#[derive(Debug, Clone, PartialEq)]
pub enum SignPolicy {
    /// Keep the all-positive diagonal seed: recovers |g_k| patterns and is
    /// only adequate when g does not change sign.
    Magnitude,
    /// Anchor ĝ_1 ≥ 0 and read the relative sign of every other mode off the
    /// first covariance row: sign(ĝ_l) = sign(Ĉ_1l·I_1l).
    AnchorFirstMode,
    /// Copy the signs of a reference vector (one entry per mode, ≥ 0 ↦ +).
    OracleSign(Vec<f64>),
}

/// Result of the covariance fit.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub g_coeffs: Vec<f64>,
    /// Gradient-descent iterations actually performed.
    pub iterations: usize,
    /// ‖∇J‖ at the returned point.
    pub grad_norm: f64,
    /// J before each iteration, then at the returned point; non-increasing.
    pub objective_trace: Vec<f64>,
}

/// Recovers f̂_k = (Ū_k − b·ĝ_k·Q_k)/D_k from the ensemble mean. When the
/// driver has drift (b ≠ 0) the mean also carries g, so `g_coeffs` must be
/// supplied; any mode with |D_k| below [`MIN_FORCING`] is reported as
/// unrecoverable rather than divided through.
pub fn reconstruct_f(
    stats: &ModalStats,
    kernels: &TimeKernelMatrix,
    params: &LevyParams,
    g_coeffs: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let k_modes = kernels.k_modes();
    if stats.mean.len() != k_modes {
        return Err(Error::Domain(format!(
            "statistics carry {} modes but the kernel matrix has {k_modes}",
            stats.mean.len()
        )));
    }
    let g = match (params.b != 0.0, g_coeffs) {
        (false, _) => None,
        (true, Some(g)) => {
            if g.len() != k_modes {
                return Err(Error::Domain(format!(
                    "drift correction needs {k_modes} g coefficients, got {}",
                    g.len()
                )));
            }
            Some(g)
        }
        (true, None) => {
            return Err(Error::Domain(
                "driver drift couples g into the mean; supply g coefficients to recover f"
                    .into(),
            ));
        }
    };
    (0..k_modes)
        .map(|k| {
            let d = kernels.d[k];
            if d.abs() < MIN_FORCING {
                return Err(Error::Degenerate(format!(
                    "mode {} has vanishing forcing integral |D| = {:.3e}; \
                     its f coefficient is unrecoverable from the mean",
                    k + 1,
                    d.abs()
                )));
            }
            let drift = g.map_or(0.0, |g| params.b * g[k] * kernels.q[k]);
            Ok((stats.mean[k] - drift) / d)
        })
        .collect()
}

/// The covariance-fit objective
/// J(g) = ‖γ·(ggᵀ)∘I − (Ĉ − floor·Id)‖_F² + α‖g‖²; exactly even in g.
pub fn covariance_objective(
    g: &[f64],
    gamma: f64,
    i_matrix: &DMatrix<f64>,
    c_fit: &DMatrix<f64>,
    alpha: f64,
) -> f64 {
    let k = g.len();
    let mut j = 0.0;
    for r in 0..k {
        for c in 0..k {
            let res = gamma * g[r] * g[c] * i_matrix[(r, c)] - c_fit[(r, c)];
            j += res * res;
        }
    }
    j + alpha * g.iter().map(|v| v * v).sum::<f64>()
}

fn covariance_gradient(
    g: &DVector<f64>,
    gamma: f64,
    i_matrix: &DMatrix<f64>,
    c_fit: &DMatrix<f64>,
    alpha: f64,
) -> DVector<f64> {
    let k = g.len();
    let mut grad = DVector::zeros(k);
    for m in 0..k {
        let mut s = 0.0;
        for l in 0..k {
            let res = gamma * g[m] * g[l] * i_matrix[(m, l)] - c_fit[(m, l)];
            s += res * i_matrix[(m, l)] * g[l];
        }
        grad[m] = 4.0 * gamma * s + 2.0 * alpha * g[m];
    }
    grad
}

/// Recovers ĝ from the modal covariance: seeds each magnitude from the
/// diagonal, ĝ_k⁰ = √(max(0, (Ĉ_kk − floor)/(γ·I_kk))), assigns signs by
/// `policy`, then polishes with backtracking gradient descent on
/// [`covariance_objective`] (Armijo condition, step carried across
/// iterations, at most 500 of them, stopping at ‖∇J‖ ≤ 1e-10).
pub fn reconstruct_g(
    stats: &ModalStats,
    kernels: &TimeKernelMatrix,
    params: &LevyParams,
    alpha: f64,
    noise_floor: f64,
    policy: &SignPolicy,
) -> Result<FitReport> {
    let k_modes = kernels.k_modes();
    if stats.cov.nrows() != k_modes {
        return Err(Error::Domain(format!(
            "statistics carry {} modes but the kernel matrix has {k_modes}",
            stats.cov.nrows()
        )));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!(
            "fit regularization must be non-negative and finite, got {alpha}"
        )));
    }
    if !(noise_floor >= 0.0) || !noise_floor.is_finite() {
        return Err(Error::Domain(format!(
            "noise floor must be non-negative and finite, got {noise_floor}"
        )));
    }
    let gamma = params.noise_intensity();
    if gamma <= 0.0 {
        return Err(Error::Degenerate(
            "driver has no stochastic component (σ = λ_p·σ_J² = 0), so the covariance \
             carries no information about g"
                .into(),
        ));
    }
    let i_matrix = &kernels.i_matrix;
    for k in 0..k_modes {
        if i_matrix[(k, k)] < MIN_KERNEL_ENERGY {
            return Err(Error::Degenerate(format!(
                "mode {} has vanishing kernel energy I = {:.3e}; its g coefficient is \
                 unrecoverable from the covariance",
                k + 1,
                i_matrix[(k, k)]
            )));
        }
    }
    if let SignPolicy::OracleSign(reference) = policy {
        if reference.len() != k_modes {
            return Err(Error::Domain(format!(
                "sign reference needs {k_modes} entries, got {}",
                reference.len()
            )));
        }
    }

    let c_fit = {
        let mut c = stats.cov.clone();
        for k in 0..k_modes {
            c[(k, k)] -= noise_floor;
        }
        c
    };
    let seed_mag: Vec<f64> = (0..k_modes)
        .map(|k| (c_fit[(k, k)] / (gamma * i_matrix[(k, k)])).max(0.0).sqrt())
        .collect();
    let signs: Vec<f64> = match policy {
        SignPolicy::Magnitude => vec![1.0; k_modes],
        SignPolicy::AnchorFirstMode => (0..k_modes)
            .map(|l| {
                if l == 0 || stats.cov[(0, l)] * i_matrix[(0, l)] >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect(),
        SignPolicy::OracleSign(reference) => {
            reference.iter().map(|&r| if r >= 0.0 { 1.0 } else { -1.0 }).collect()
        }
    };
    let mut g = DVector::from_iterator(
        k_modes,
        seed_mag.iter().zip(&signs).map(|(m, s)| m * s),
    );

    let objective = |g: &DVector<f64>| {
        covariance_objective(g.as_slice(), gamma, i_matrix, &c_fit, alpha)
    };
    let mut trace = Vec::new();
    let mut step = 1.0f64;
    let mut iterations = 0;
    let mut grad = covariance_gradient(&g, gamma, i_matrix, &c_fit, alpha);
    for _ in 0..500 {
        let grad_norm = grad.norm();
        if grad_norm <= 1e-10 {
            break;
        }
        let j0 = objective(&g);
        trace.push(j0);
        step *= 2.0;
        while step > 1e-20 {
            let candidate = &g - step * &grad;
            if objective(&candidate) <= j0 - 0.5 * step * grad_norm * grad_norm {
                break;
            }
            step /= 2.0;
        }
        g -= step * &grad;
        iterations += 1;
        grad = covariance_gradient(&g, gamma, i_matrix, &c_fit, alpha);
    }
    trace.push(objective(&g));
    Ok(FitReport {
        g_coeffs: g.as_slice().to_vec(),
        iterations,
        grad_norm: grad.norm(),
        objective_trace: trace,
    })
}

/// Relative L² distance ‖truth − rec‖/‖truth‖ with the rectangle rule on
/// `grid`; a vanishing truth makes the ratio meaningless and is rejected.
pub fn relative_l2_error(truth: &[f64], rec: &[f64], grid: &Grid) -> Result<f64> {
    let n_pts = grid.points().len();
    if truth.len() != n_pts || rec.len() != n_pts {
        return Err(Error::Domain(format!(
            "error norm needs one value per grid point: got {} and {} for {n_pts}",
            truth.len(),
            rec.len()
        )));
    }
    let dx = grid.spacing();
    let diff: f64 = truth.iter().zip(rec).map(|(t, r)| (t - r) * (t - r)).sum::<f64>() * dx;
    let base: f64 = truth.iter().map(|t| t * t).sum::<f64>() * dx;
    if base == 0.0 {
        return Err(Error::Domain("relative error against an identically zero truth".into()));
    }
    Ok((diff / base).sqrt())
}
