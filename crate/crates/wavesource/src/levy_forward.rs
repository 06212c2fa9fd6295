//! Monte Carlo forward model for a vibrating string driven by a Lévy noise.
//!
//! The displacement solves u_tt = u_xx + f(x)h(t) + g(x)·dL_t/dt on [0, L]
//! with zero endpoints and rest initial data, where L_t = b·t + σ·W_t + Σ J_m
//! is a Lévy process with Brownian part σW and compound-Poisson jumps
//! (rate λ_p, amplitudes N(0, σ_J²)). Expanding in the sine eigenbasis, each
//! mode obeys a driven oscillator whose Duhamel kernel is
//! A_k(t) = sin(ω_k(T − t))/ω_k, and the terminal modal value is
//!
//! ```text
//! u_k(T) = f_k Σ_j h(t_j)A_k(t_j)Δt
//!        + g_k [ b Σ_j A_k(t_j)Δt + σ Σ_j A_k(t_j)ΔW_j + Σ_m A_k(s_m)J_m ],
//! ```
//!
//! with left-endpoint time nodes t_j = jΔt and the jumps kept at their
//! continuous arrival times s_m. This module samples driver paths, simulates
//! seeded parallel ensembles of the terminal snapshot u(·, T) with optional
//! measurement noise, reduces them to modal means and covariances, and checks
//! the closed-form a-priori energy bound.

use crate::error::{Error, Result};
use crate::grid_basis::{Grid, SineBasis};
use nalgebra::DMatrix;
use rand::distributions::Uniform;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;

/// Coefficients of the driving Lévy process b·t + σ·W_t + compound Poisson.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevyParams {
    /// Drift coefficient (any sign).
    pub b: f64,
    /// Brownian volatility, ≥ 0.
    pub sigma: f64,
    /// Jump arrival rate, ≥ 0.
    pub lambda_p: f64,
    /// Jump amplitude standard deviation, ≥ 0.
    pub sigma_j: f64,
}

impl LevyParams {
    pub fn new(b: f64, sigma: f64, lambda_p: f64, sigma_j: f64) -> Result<Self> {
        for (name, v) in [("b", b), ("sigma", sigma), ("lambda_p", lambda_p), ("sigma_j", sigma_j)]
        {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        for (name, v) in [("sigma", sigma), ("lambda_p", lambda_p), ("sigma_j", sigma_j)] {
            if v < 0.0 {
                return Err(Error::Domain(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(LevyParams { b, sigma, lambda_p, sigma_j })
    }

    /// Second-moment intensity of the driver, σ² + λ_p·σ_J².
    pub fn noise_intensity(&self) -> f64 {
        self.sigma * self.sigma + self.lambda_p * self.sigma_j * self.sigma_j
    }
}

/// One realization of the driver on [0, T]: Brownian increments on the
/// uniform grid plus jump arrivals at continuous times.
#[derive(Debug, Clone)]
pub struct LevyPath {
    pub t_horizon: f64,
    /// ΔW_j ~ N(0, Δt), one per time step.
    pub dw: Vec<f64>,
    /// Sorted arrival times in [0, T).
    pub jump_times: Vec<f64>,
    /// Amplitudes J_m ~ N(0, σ_J²), aligned with `jump_times`.
    pub jump_amps: Vec<f64>,
}

impl LevyPath {
    pub fn n_steps(&self) -> usize {
        self.dw.len()
    }
}

/// Source triple (f, g, h) sampled on a space grid and a time grid, plus the
/// modal coefficients of f and g in the supplied sine basis.
#[derive(Debug, Clone)]
pub struct SourcePair {
    grid: Grid,
    basis: SineBasis,
    f_values: Vec<f64>,
    g_values: Vec<f64>,
    h_values: Vec<f64>,
    f_coeffs: Vec<f64>,
    g_coeffs: Vec<f64>,
}

impl SourcePair {
    /// Builds the sources from point values. `f_values`/`g_values` live on
    /// all points of `grid`; `h_values` lives on a uniform time grid with
    /// `h_values.len() − 1` steps and must be non-negative with at least one
    /// positive entry (otherwise the deterministic component is unidentifiable).
    pub fn new(
        grid: Grid,
        basis: SineBasis,
        f_values: Vec<f64>,
        g_values: Vec<f64>,
        h_values: Vec<f64>,
    ) -> Result<Self> {
        let n_pts = grid.points().len();
        for (name, v) in [("f", &f_values), ("g", &g_values)] {
            if v.len() != n_pts {
                return Err(Error::Domain(format!(
                    "{name} needs one value per grid point: got {} for {n_pts}",
                    v.len()
                )));
            }
        }
        if h_values.len() < 2 {
            return Err(Error::Domain(
                "h needs at least two time nodes (one step)".into(),
            ));
        }
        if h_values.iter().any(|&v| v < 0.0) {
            return Err(Error::Domain("h must be non-negative".into()));
        }
        if h_values.iter().all(|&v| v == 0.0) {
            return Err(Error::Domain(
                "h vanishes identically, which erases the deterministic source".into(),
            ));
        }
        let f_coeffs = basis.project_all(&f_values, &grid)?;
        let g_coeffs = basis.project_all(&g_values, &grid)?;
        Ok(SourcePair { grid, basis, f_values, g_values, h_values, f_coeffs, g_coeffs })
    }

    /// Samples f and g on the grid points of `grid`.
    pub fn from_fns(
        grid: Grid,
        basis: SineBasis,
        f: impl Fn(f64) -> f64,
        g: impl Fn(f64) -> f64,
        h_values: Vec<f64>,
    ) -> Result<Self> {
        let f_values = grid.points().iter().map(|&x| f(x)).collect();
        let g_values = grid.points().iter().map(|&x| g(x)).collect();
        Self::new(grid, basis, f_values, g_values, h_values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn basis(&self) -> &SineBasis {
        &self.basis
    }

    pub fn f_values(&self) -> &[f64] {
        &self.f_values
    }

    pub fn g_values(&self) -> &[f64] {
        &self.g_values
    }

    pub fn h_values(&self) -> &[f64] {
        &self.h_values
    }

    pub fn f_coeffs(&self) -> &[f64] {
        &self.f_coeffs
    }

    pub fn g_coeffs(&self) -> &[f64] {
        &self.g_coeffs
    }

    pub fn n_time_steps(&self) -> usize {
        self.h_values.len() - 1
    }
}

/// Terminal snapshots u(·, T) for `n_samples` independent driver paths.
#[derive(Debug, Clone)]
pub struct Ensemble {
    grid: Grid,
    /// One row per sample, one column per grid point.
    fields: Vec<Vec<f64>>,
    pub noise_level: f64,
    pub base_seed: u64,
}

impl Ensemble {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn fields(&self) -> &[Vec<f64>] {
        &self.fields
    }

    pub fn n_samples(&self) -> usize {
        self.fields.len()
    }
}

/// Sample modal mean and covariance of an ensemble.
#[derive(Debug, Clone)]
pub struct ModalStats {
    /// Ū_k, k = 1..K.
    pub mean: Vec<f64>,
    /// Unbiased K×K sample covariance (divisor n − 1).
    pub cov: DMatrix<f64>,
    pub n_samples: usize,
}

/// Monte Carlo estimate of E‖u(·,T)‖² next to its closed-form upper bound.
#[derive(Debug, Clone, Copy)]
pub struct EnergyReport {
    pub estimate: f64,
    pub bound: f64,
}

/// Per-sample seed derived from the ensemble seed by an avalanche mix, so
/// neighboring indices get unrelated streams.
pub fn mix_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Duhamel kernel of the mode with temporal frequency ω: sin(ω(T − t))/ω.
pub fn kernel_a(omega: f64, t: f64, t_horizon: f64) -> f64 {
    (omega * (t_horizon - t)).sin() / omega
}

/// Draws one driver path: Brownian increments on the time grid, then the
/// jump count, then sorted arrival times, then amplitudes — in that fixed
/// order, so a seed pins the whole path.
pub fn sample_levy_path(
    params: &LevyParams,
    t_horizon: f64,
    n_steps: usize,
    seed: u64,
) -> Result<LevyPath> {
    check_horizon(t_horizon)?;
    if n_steps == 0 {
        return Err(Error::Domain("need at least one time step".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_path_with_rng(params, t_horizon, n_steps, &mut rng))
}

fn sample_path_with_rng(
    params: &LevyParams,
    t_horizon: f64,
    n_steps: usize,
    rng: &mut ChaCha8Rng,
) -> LevyPath {
    let dt = t_horizon / n_steps as f64;
    let brownian = Normal::new(0.0, dt.sqrt()).expect("positive std");
    let dw: Vec<f64> = (0..n_steps).map(|_| brownian.sample(rng)).collect();
    let rate = params.lambda_p * t_horizon;
    let n_jumps = if rate > 0.0 {
        Poisson::new(rate).expect("positive rate").sample(rng) as usize
    } else {
        0
    };
    let arrival = Uniform::new(0.0, t_horizon);
    let mut jump_times: Vec<f64> = (0..n_jumps).map(|_| rng.sample(arrival)).collect();
    jump_times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    let amp = Normal::new(0.0, params.sigma_j).expect("non-negative std");
    let jump_amps: Vec<f64> = (0..n_jumps).map(|_| amp.sample(rng)).collect();
    LevyPath { t_horizon, dw, jump_times, jump_amps }
}

/// Terminal value of one mode for a given path, per the formula in the
/// module docs. `h_values` must live on the path's time grid (n_steps + 1
/// nodes); `omega` is the mode's temporal frequency.
pub fn mode_final_value(
    f_k: f64,
    g_k: f64,
    h_values: &[f64],
    path: &LevyPath,
    omega: f64,
    params: &LevyParams,
) -> Result<f64> {
    if h_values.len() != path.n_steps() + 1 {
        return Err(Error::Domain(format!(
            "h has {} nodes but the path's time grid has {}",
            h_values.len(),
            path.n_steps() + 1
        )));
    }
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("mode frequency must be positive, got {omega}")));
    }
    let t = path.t_horizon;
    let dt = t / path.n_steps() as f64;
    let mut forced = 0.0;
    let mut drift = 0.0;
    let mut brownian = 0.0;
    for (j, &inc) in path.dw.iter().enumerate() {
        let a = kernel_a(omega, j as f64 * dt, t);
        forced += h_values[j] * a;
        drift += a;
        brownian += a * inc;
    }
    let jumps: f64 = path
        .jump_times
        .iter()
        .zip(&path.jump_amps)
        .map(|(&s, &j)| kernel_a(omega, s, t) * j)
        .sum();
    Ok(f_k * forced * dt + g_k * (params.b * drift * dt + params.sigma * brownian + jumps))
}

/// Simulates `n_samples` terminal snapshots on the source grid, truncating
/// the modal expansion at `k_modes`, adding i.i.d. N(0, noise_level²)
/// measurement noise pointwise. Samples are independent and individually
/// seeded from `base_seed`, so the result is reproducible regardless of how
/// the parallel runtime schedules them.
pub fn simulate_ensemble(
    sources: &SourcePair,
    params: &LevyParams,
    t_horizon: f64,
    k_modes: usize,
    n_samples: usize,
    noise_level: f64,
    base_seed: u64,
) -> Result<Ensemble> {
    check_horizon(t_horizon)?;
    check_modes(sources, k_modes)?;
    if n_samples == 0 {
        return Err(Error::Domain("ensemble needs at least one sample".into()));
    }
    if !(noise_level >= 0.0) {
        return Err(Error::Domain(format!("noise level must be non-negative, got {noise_level}")));
    }
    let omegas: Vec<f64> =
        (1..=k_modes).map(|k| sources.basis.frequency(k)).collect::<Result<_>>()?;
    let n_steps = sources.n_time_steps();
    let grid = sources.grid.clone();
    let n_points = grid.points().len();
    let fields: Vec<Vec<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(base_seed, i as u64));
            let path = sample_path_with_rng(params, t_horizon, n_steps, &mut rng);
            let coeffs: Vec<f64> = omegas
                .iter()
                .enumerate()
                .map(|(idx, &w)| {
                    mode_final_value(
                        sources.f_coeffs[idx],
                        sources.g_coeffs[idx],
                        &sources.h_values,
                        &path,
                        w,
                        params,
                    )
                })
                .collect::<Result<_>>()?;
            let mut field = sources.basis.synthesize(&coeffs, &grid)?;
            if noise_level > 0.0 {
                let meas = Normal::new(0.0, noise_level).expect("positive std");
                for v in field.iter_mut().take(n_points) {
                    *v += meas.sample(&mut rng);
                }
            }
            Ok(field)
        })
        .collect::<Result<_>>()?;
    Ok(Ensemble { grid, fields, noise_level, base_seed })
}

/// Projects every sample onto the first `k_modes` basis functions and
/// reduces to the sample mean and unbiased covariance. Accumulation is
/// serial and index-ordered, so the statistics are bit-stable.
pub fn ensemble_statistics(
    ensemble: &Ensemble,
    basis: &SineBasis,
    k_modes: usize,
) -> Result<ModalStats> {
    if k_modes == 0 || k_modes > basis.modes() {
        return Err(Error::Domain(format!(
            "mode count must lie in 1..={}, got {k_modes}",
            basis.modes()
        )));
    }
    let n = ensemble.n_samples();
    if n < 2 {
        return Err(Error::Domain(format!(
            "covariance needs at least two samples, got {n}"
        )));
    }
    let coeffs: Vec<Vec<f64>> = ensemble
        .fields
        .iter()
        .map(|row| {
            Ok(basis.project_all(row, &ensemble.grid)?[..k_modes].to_vec())
        })
        .collect::<Result<_>>()?;
    let nf = n as f64;
    let mut mean = vec![0.0; k_modes];
    for c in &coeffs {
        for (m, &v) in mean.iter_mut().zip(c) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= nf;
    }
    let mut cov = DMatrix::zeros(k_modes, k_modes);
    for c in &coeffs {
        for k in 0..k_modes {
            let dk = c[k] - mean[k];
            for l in 0..k_modes {
                cov[(k, l)] += dk * (c[l] - mean[l]);
            }
        }
    }
    cov /= nf - 1.0;
    Ok(ModalStats { mean, cov, n_samples: n })
}

/// Monte Carlo estimate of the terminal energy E‖u(·,T)‖²_{L²(0,L)} via the
/// modal Parseval sum, next to the closed-form bound
///
/// ```text
/// (2T⁴/3)‖h‖²_∞‖f‖² + [(2b²T⁴ + σ²T³ + λ_p σ_J² T³)/3]‖g‖²,
/// ```
///
/// with ‖f‖², ‖g‖² evaluated by the rectangle rule on the source grid.
pub fn energy_bound_check(
    sources: &SourcePair,
    params: &LevyParams,
    t_horizon: f64,
    n_samples: usize,
    base_seed: u64,
) -> Result<EnergyReport> {
    check_horizon(t_horizon)?;
    if n_samples == 0 {
        return Err(Error::Domain("energy estimate needs at least one sample".into()));
    }
    let k_modes = sources.basis.modes();
    let omegas: Vec<f64> =
        (1..=k_modes).map(|k| sources.basis.frequency(k)).collect::<Result<_>>()?;
    let n_steps = sources.n_time_steps();
    let total: f64 = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(base_seed, i as u64));
            let path = sample_path_with_rng(params, t_horizon, n_steps, &mut rng);
            let mut sq = 0.0;
            for (idx, &w) in omegas.iter().enumerate() {
                let u = mode_final_value(
                    sources.f_coeffs[idx],
                    sources.g_coeffs[idx],
                    &sources.h_values,
                    &path,
                    w,
                    params,
                )?;
                sq += u * u;
            }
            Ok(sq)
        })
        .collect::<Result<Vec<f64>>>()?
        .iter()
        .sum();
    let estimate = total / n_samples as f64;

    let dx = sources.grid.spacing();
    let norm_sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>() * dx;
    let h_inf = sources.h_values.iter().cloned().fold(0.0f64, f64::max);
    let t4 = t_horizon.powi(4);
    let t3 = t_horizon.powi(3);
    let bound = (2.0 * t4 / 3.0) * h_inf * h_inf * norm_sq(&sources.f_values)
        + ((2.0 * params.b * params.b * t4 + params.noise_intensity() * t3) / 3.0)
            * norm_sq(&sources.g_values);
    Ok(EnergyReport { estimate, bound })
}

fn check_horizon(t_horizon: f64) -> Result<()> {
    if !(t_horizon > 0.0) || !t_horizon.is_finite() {
        return Err(Error::Domain(format!(
            "time horizon must be positive and finite, got {t_horizon}"
        )));
    }
    Ok(())
}

fn check_modes(sources: &SourcePair, k_modes: usize) -> Result<()> {
    if k_modes == 0 || k_modes > sources.basis.modes() {
        return Err(Error::Domain(format!(
            "mode count must lie in 1..={}, got {k_modes}",
            sources.basis.modes()
        )));
    }
    Ok(())
}
