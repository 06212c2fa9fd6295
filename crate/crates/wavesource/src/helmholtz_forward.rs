//! Forward model for the 1-D stochastic Helmholtz source problem without
//! attenuation.
//!
//! The second moment of the random wavefield determines only the integral
//! of the strength μ against a characteristic-function kernel:
//!
//! ```text
//! (T_ν μ)(x) = ∫₀¹ cos²(2ν|x − y|)·μ(y) dy,        x outside [0, 1],
//! E|u(x)|²   = (1/4ν²)·∫₀¹ μ(y) dy,
//! u(x)       = (1/2iν) Σ_j e^{iν|x − y_j|} √μ(y_j) ΔW_j,  ΔW_j ~ N(0, Δy).
//! ```
//!
//! This module provides the operator, its discrete design matrices
//! A_ij = Δy·cos²(2ν|x_i − y_j|), synthetic observations with optional
//! Gaussian noise, and the Monte Carlo sampler behind the identity above.
//! Everything is discretized with the rectangle sum over the right-endpoint
//! source nodes y_j = j·Δy, j = 1..N, matching the design matrix's column
//! indexing.

use crate::error::{Error, Result};
use crate::grid_basis::Grid;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Kernel placed in the design matrix. `CosSqTwoNu` is the canonical choice
/// the rank diagnostics and defaults assume; the other two arise from the
/// real and complex second-order moments of the field and are kept
/// selectable for experimentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelVariant {
    /// cos²(2ν|x − y|)
    #[default]
    CosSqTwoNu,
    /// cos²(ν|x − y|)
    CosSqNu,
    /// cos(2ν|x − y|)
    CosTwoNu,
}

/// Evaluates the canonical kernel cos²(2ν|x − y|); always in [0, 1].
pub fn kernel(nu: f64, x: f64, y: f64) -> f64 {
    (2.0 * nu * (x - y).abs()).cos().powi(2)
}

/// Evaluates the selected kernel variant.
pub fn kernel_variant(variant: KernelVariant, nu: f64, x: f64, y: f64) -> f64 {
    let d = (x - y).abs();
    match variant {
        KernelVariant::CosSqTwoNu => (2.0 * nu * d).cos().powi(2),
        KernelVariant::CosSqNu => (nu * d).cos().powi(2),
        KernelVariant::CosTwoNu => (2.0 * nu * d).cos(),
    }
}

/// Sampled strength μ at the right-endpoint source nodes of its grid.
///
/// The strength is a variance density, so `new` rejects negative entries
/// (the wavefield sampler takes √μ). Reconstructions may legitimately dip
/// below zero; build those with `reconstruction`, which only flags the sign
/// violation, and which the sampler refuses.
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthField {
    grid: Grid,
    values: Vec<f64>,
    has_negative: bool,
}

impl StrengthField {
    /// Strict constructor for true sources: any negative entry is rejected.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        let field = Self::reconstruction(grid, values)?;
        if field.has_negative {
            return Err(Error::Domain(
                "strength field has negative entries; build reconstructions with \
                 StrengthField::reconstruction"
                    .into(),
            ));
        }
        Ok(field)
    }

    /// Permissive constructor: keeps negative entries but flags them.
    pub fn reconstruction(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::Domain(format!(
                "strength field needs one value per source node: got {} values for {} nodes",
                values.len(),
                grid.n()
            )));
        }
        let has_negative = values.iter().any(|&v| v < 0.0);
        Ok(StrengthField { grid, values, has_negative })
    }

    /// Samples a function at the source nodes of `grid`.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = source_nodes(&grid).map(&f).collect();
        Self::reconstruction(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn has_negative(&self) -> bool {
        self.has_negative
    }

    /// The node y_j backing `values[j]`.
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        source_nodes(&self.grid)
    }
}

/// Right-endpoint source nodes y_j = a + j·Δy, j = 1..N.
fn source_nodes(grid: &Grid) -> impl Iterator<Item = f64> + '_ {
    let a = grid.a();
    let dy = grid.spacing();
    (1..=grid.n()).map(move |j| a + j as f64 * dy)
}

/// Strictly increasing positive frequencies ν_1 < … < ν_K.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySet {
    freqs: Vec<f64>,
}

impl FrequencySet {
    pub fn new(freqs: Vec<f64>) -> Result<Self> {
        if freqs.is_empty() {
            return Err(Error::Domain("frequency set must be non-empty".into()));
        }
        if freqs.iter().any(|&f| !(f > 0.0)) {
            return Err(Error::Domain("frequencies must be positive".into()));
        }
        if freqs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("frequencies must be strictly increasing".into()));
        }
        Ok(FrequencySet { freqs })
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }
}

/// Noisy multi-frequency observations H[i][k] = (T_{ν_k} μ)(x_i) + η_ik.
#[derive(Debug, Clone)]
pub struct ObservationSet {
    pub obs_points: Vec<f64>,
    pub freqs: FrequencySet,
    /// M × K data matrix, one column per frequency.
    pub data: DMatrix<f64>,
    pub noise_level: f64,
}

/// One realization of the complex wavefield at the observation points.
#[derive(Debug, Clone)]
pub struct WavefieldSample {
    pub obs_points: Vec<f64>,
    pub values: Vec<Complex64>,
    pub freq: f64,
    pub seed: u64,
}

/// Default observation layout: M/2 points uniform (endpoints included) in
/// each of [−1.2, −0.2] and [1.2, 2.2], both outside the source support.
pub fn default_observation_points(m: usize) -> Result<Vec<f64>> {
    if m < 4 || !m.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "two-block observation layout needs an even count of at least 4 points, got {m}"
        )));
    }
    let half = m / 2;
    let block = |lo: f64, hi: f64| {
        let step = (hi - lo) / (half - 1) as f64;
        (0..half).map(move |i| lo + i as f64 * step)
    };
    Ok(block(-1.2, -0.2).chain(block(1.2, 2.2)).collect())
}

/// Applies the discrete forward operator with the canonical kernel:
/// H(x_i) = Δy Σ_j cos²(2ν|x_i − y_j|)·μ(y_j).
pub fn apply_forward(mu: &StrengthField, nu: f64, obs_points: &[f64]) -> Result<Vec<f64>> {
    apply_forward_with(KernelVariant::CosSqTwoNu, mu, nu, obs_points)
}

/// Forward application with an explicit kernel variant.
pub fn apply_forward_with(
    variant: KernelVariant,
    mu: &StrengthField,
    nu: f64,
    obs_points: &[f64],
) -> Result<Vec<f64>> {
    check_freq(nu)?;
    let dy = mu.grid().spacing();
    Ok(obs_points
        .iter()
        .map(|&x| {
            mu.nodes()
                .zip(mu.values())
                .map(|(y, &v)| kernel_variant(variant, nu, x, y) * v)
                .sum::<f64>()
                * dy
        })
        .collect())
}

/// Assembles A ∈ R^{M×N} with A_ij = Δy·cos²(2ν|x_i − y_j|), so that
/// `apply_forward(μ) == A·μ` with the same quadrature.
pub fn assemble_matrix(nu: f64, obs_points: &[f64], source_grid: &Grid) -> Result<DMatrix<f64>> {
    assemble_matrix_with(KernelVariant::CosSqTwoNu, nu, obs_points, source_grid)
}

/// Assembly with an explicit kernel variant.
pub fn assemble_matrix_with(
    variant: KernelVariant,
    nu: f64,
    obs_points: &[f64],
    source_grid: &Grid,
) -> Result<DMatrix<f64>> {
    check_freq(nu)?;
    let dy = source_grid.spacing();
    let a = source_grid.a();
    Ok(DMatrix::from_fn(obs_points.len(), source_grid.n(), |i, j| {
        let y = a + (j as f64 + 1.0) * dy;
        dy * kernel_variant(variant, nu, obs_points[i], y)
    }))
}

/// Generates synthetic observations: forward data plus i.i.d. Gaussian noise
/// of standard deviation `noise_level`, reproducible from `seed`.
pub fn synth_observations(
    mu_true: &StrengthField,
    freqs: &FrequencySet,
    obs_points: &[f64],
    noise_level: f64,
    seed: u64,
) -> Result<ObservationSet> {
    synth_observations_with(
        KernelVariant::CosSqTwoNu,
        mu_true,
        freqs,
        obs_points,
        noise_level,
        seed,
    )
}

/// Observation synthesis with an explicit kernel variant.
pub fn synth_observations_with(
    variant: KernelVariant,
    mu_true: &StrengthField,
    freqs: &FrequencySet,
    obs_points: &[f64],
    noise_level: f64,
    seed: u64,
) -> Result<ObservationSet> {
    if noise_level < 0.0 {
        return Err(Error::Domain(format!("noise level must be non-negative, got {noise_level}")));
    }
    let m = obs_points.len();
    let k = freqs.len();
    let mut data = DMatrix::zeros(m, k);
    for (col, &nu) in freqs.freqs().iter().enumerate() {
        let h = apply_forward_with(variant, mu_true, nu, obs_points)?;
        for (row, &v) in h.iter().enumerate() {
            data[(row, col)] = v;
        }
    }
    if noise_level > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise_level).expect("positive std");
        // Column-major fill order is part of the determinism contract.
        for col in 0..k {
            for row in 0..m {
                data[(row, col)] += normal.sample(&mut rng);
            }
        }
    }
    Ok(ObservationSet {
        obs_points: obs_points.to_vec(),
        freqs: freqs.clone(),
        data,
        noise_level,
    })
}

/// Observation synthesis from the analytic strength on an `oversample`-times
/// finer source grid than the inversion will use. Mitigates the inverse crime
/// of generating data with the exact discrete operator being inverted.
pub fn synth_observations_oversampled(
    mu_true: impl Fn(f64) -> f64,
    inversion_grid: &Grid,
    oversample: usize,
    freqs: &FrequencySet,
    obs_points: &[f64],
    noise_level: f64,
    seed: u64,
) -> Result<ObservationSet> {
    if oversample == 0 {
        return Err(Error::Domain("oversample factor must be at least 1".into()));
    }
    let fine = Grid::uniform(
        inversion_grid.a(),
        inversion_grid.b(),
        inversion_grid.n() * oversample,
    )?;
    let mu = StrengthField::from_fn(fine, mu_true)?;
    synth_observations(&mu, freqs, obs_points, noise_level, seed)
}

/// Draws one wavefield realization u(x_i) = (1/2iν) Σ_j e^{iν|x_i − y_j|}
/// √μ(y_j) ΔW_j with ΔW_j ~ N(0, Δy), reproducible from `seed`.
pub fn sample_wavefield(
    mu: &StrengthField,
    nu: f64,
    obs_points: &[f64],
    seed: u64,
) -> Result<WavefieldSample> {
    check_freq(nu)?;
    if mu.has_negative() {
        return Err(Error::Domain(
            "wavefield sampling needs √μ, so μ must be non-negative".into(),
        ));
    }
    let dy = mu.grid().spacing();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, dy.sqrt()).expect("positive std");
    let dw: Vec<f64> = (0..mu.values().len()).map(|_| normal.sample(&mut rng)).collect();
    // 1/(2iν) = −i/(2ν)
    let scale = Complex64::new(0.0, -1.0 / (2.0 * nu));
    let nodes: Vec<f64> = mu.nodes().collect();
    let values = obs_points
        .iter()
        .map(|&x| {
            let sum: Complex64 = nodes
                .iter()
                .zip(mu.values())
                .zip(&dw)
                .map(|((&y, &v), &inc)| {
                    Complex64::from_polar(1.0, nu * (x - y).abs()) * (v.sqrt() * inc)
                })
                .sum();
            scale * sum
        })
        .collect();
    Ok(WavefieldSample { obs_points: obs_points.to_vec(), values, freq: nu, seed })
}

/// Per-point average of |u(x_i)|² over a set of realizations sharing the
/// same frequency and observation points.
pub fn empirical_second_moment(samples: &[WavefieldSample]) -> Result<Vec<f64>> {
    let first = samples
        .first()
        .ok_or_else(|| Error::Domain("second moment needs at least one sample".into()))?;
    for s in samples {
        if s.freq != first.freq || s.obs_points != first.obs_points {
            return Err(Error::Domain(
                "all samples must share one frequency and observation set".into(),
            ));
        }
    }
    let m = first.obs_points.len();
    let mut acc = vec![0.0; m];
    for s in samples {
        for (a, v) in acc.iter_mut().zip(&s.values) {
            *a += v.norm_sqr();
        }
    }
    let n = samples.len() as f64;
    Ok(acc.into_iter().map(|a| a / n).collect())
}

fn check_freq(nu: f64) -> Result<()> {
    if !(nu > 0.0) {
        return Err(Error::Domain(format!("frequency must be positive, got {nu}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn unit_field(n: usize) -> StrengthField {
        StrengthField::from_fn(Grid::uniform(0.0, 1.0, n).unwrap(), |_| 1.0).unwrap()
    }

    #[test]
    fn kernel_matches_closed_forms() {
        assert_eq!(kernel(3.7, 0.25, 0.25), 1.0);
        // quarter period: cos(π/2) underflows to ~6e-17, squared ~4e-33
        assert!(kernel(PI / 8.0, 0.0, 2.0) < 1e-30);
        assert_relative_eq!(kernel(1.0, 0.0, 1.0), (2.0f64).cos().powi(2), epsilon = 1e-15);
        assert_relative_eq!(kernel(1.0, 0.0, 1.0), 0.173_178_1, epsilon = 1e-7);
    }

    #[test]
    fn variants_reduce_to_their_definitions() {
        let (nu, x, y) = (1.3, -0.4, 0.7);
        let d: f64 = x - y;
        assert_eq!(kernel_variant(KernelVariant::CosSqTwoNu, nu, x, y), kernel(nu, x, y));
        assert_relative_eq!(
            kernel_variant(KernelVariant::CosSqNu, nu, x, y),
            (nu * d.abs()).cos().powi(2)
        );
        assert_relative_eq!(
            kernel_variant(KernelVariant::CosTwoNu, nu, x, y),
            (2.0 * nu * d.abs()).cos()
        );
    }

    #[test]
    fn forward_of_unit_strength_matches_the_integral() {
        // ∫₀¹ cos²((π/2)y) dy = 1/2 at ν = π/4 observed from x = 0.
        let got = apply_forward(&unit_field(200), PI / 4.0, &[0.0]).unwrap()[0];
        assert!((got - 0.5).abs() <= 5e-3, "got {got}");
    }

    #[test]
    fn forward_is_linear_and_zero_on_zero() {
        let grid = Grid::uniform(0.0, 1.0, 50).unwrap();
        let zero = StrengthField::new(grid, vec![0.0; 50]).unwrap();
        let out = apply_forward(&zero, 2.0, &[-0.5, 1.5]).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn null_space_witness_vanishes_discretely() {
        // μ(y) = cos(8νy) with ν = π/2 lies in the kernel of T_ν; the
        // right-endpoint rectangle sum hits it exactly (integer periods).
        let n = 10_000;
        let grid = Grid::uniform(0.0, 1.0, n).unwrap();
        let mu = StrengthField::reconstruction(
            grid,
            (1..=n).map(|j| (4.0 * PI * j as f64 / n as f64).cos()).collect(),
        )
        .unwrap();
        let out = apply_forward(&mu, PI / 2.0, &[-0.7, -0.2, 1.2, 1.9]).unwrap();
        for v in out {
            assert!(v.abs() <= 1e-6, "null-space image {v}");
        }
    }

    #[test]
    fn assembled_matrix_reproduces_apply_forward() {
        let grid = Grid::uniform(0.0, 1.0, 80).unwrap();
        let mu = StrengthField::from_fn(grid.clone(), |y| 0.5 * (1.0 - (2.0 * PI * y).cos()))
            .unwrap();
        let xs = default_observation_points(20).unwrap();
        let a = assemble_matrix(3.0, &xs, &grid).unwrap();
        let via_op = apply_forward(&mu, 3.0, &xs).unwrap();
        let v = nalgebra::DVector::from_column_slice(mu.values());
        let via_mat = a * v;
        for (x, y) in via_op.iter().zip(via_mat.iter()) {
            assert!((x - y).abs() <= 1e-14, "{x} vs {y}");
        }
    }

    #[test]
    fn matrix_entries_stay_within_kernel_bounds() {
        let grid = Grid::uniform(0.0, 1.0, 64).unwrap();
        let xs = default_observation_points(16).unwrap();
        let a = assemble_matrix(2.5, &xs, &grid).unwrap();
        let dy = grid.spacing();
        assert!(a.iter().all(|&v| (0.0..=dy).contains(&v)));
    }

    #[test]
    fn singular_values_of_a_block_collapse() {
        // The kernel splits into {1, cos4νy, sin4νy}, so the spectrum dies
        // after three modes.
        let grid = Grid::uniform(0.0, 1.0, 200).unwrap();
        let xs = default_observation_points(200).unwrap();
        let a = assemble_matrix(1.0, &xs, &grid).unwrap();
        let sv = a.svd(false, false).singular_values;
        assert!(sv[19] / sv[0] <= 1e-6, "σ20/σ1 = {}", sv[19] / sv[0]);
    }

    #[test]
    fn synthetic_observations_are_deterministic_and_noise_free_when_asked() {
        let mu = unit_field(100);
        let freqs = FrequencySet::new(vec![1.0, 2.0, 3.0]).unwrap();
        let xs = default_observation_points(12).unwrap();
        let clean = synth_observations(&mu, &freqs, &xs, 0.0, 7).unwrap();
        for (col, &nu) in freqs.freqs().iter().enumerate() {
            let h = apply_forward(&mu, nu, &xs).unwrap();
            for (row, &v) in h.iter().enumerate() {
                assert_eq!(clean.data[(row, col)], v);
            }
        }
        let a = synth_observations(&mu, &freqs, &xs, 0.01, 42).unwrap();
        let b = synth_observations(&mu, &freqs, &xs, 0.01, 42).unwrap();
        assert_eq!(a.data, b.data);
        let c = synth_observations(&mu, &freqs, &xs, 0.01, 43).unwrap();
        assert_ne!(a.data, c.data);
    }

    #[test]
    fn injected_noise_has_the_requested_scale() {
        let mu = unit_field(100);
        let freqs = FrequencySet::new((1..=50).map(f64::from).collect()).unwrap();
        let xs = default_observation_points(200).unwrap();
        let noisy = synth_observations(&mu, &freqs, &xs, 0.01, 11).unwrap();
        let clean = synth_observations(&mu, &freqs, &xs, 0.0, 11).unwrap();
        let diff = &noisy.data - &clean.data;
        let n = diff.len() as f64; // 10⁴ entries
        let var = diff.iter().map(|v| v * v).sum::<f64>() / n;
        let std = var.sqrt();
        assert!((0.0097..=0.0103).contains(&std), "sample std {std}");
    }

    #[test]
    fn wavefield_of_zero_strength_is_exactly_zero() {
        let grid = Grid::uniform(0.0, 1.0, 30).unwrap();
        let zero = StrengthField::new(grid, vec![0.0; 30]).unwrap();
        let s = sample_wavefield(&zero, 1.0, &[-0.5, 1.5], 3).unwrap();
        assert!(s.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn wavefield_rejects_flagged_negative_strength() {
        let grid = Grid::uniform(0.0, 1.0, 4).unwrap();
        let mu = StrengthField::reconstruction(grid, vec![1.0, -0.2, 0.5, 0.3]).unwrap();
        assert!(sample_wavefield(&mu, 1.0, &[2.0], 1).is_err());
    }

    #[test]
    fn wavefield_modulus_is_translation_invariant() {
        let n = 64;
        let values: Vec<f64> = (0..n).map(|j| 1.0 + 0.5 * (j as f64 / n as f64).sin()).collect();
        let base = StrengthField::new(Grid::uniform(0.0, 1.0, n).unwrap(), values.clone()).unwrap();
        let shifted = StrengthField::new(Grid::uniform(0.5, 1.5, n).unwrap(), values).unwrap();
        let xs = [-0.9, -0.3, 1.4, 2.0];
        let xs_shifted: Vec<f64> = xs.iter().map(|x| x + 0.5).collect();
        let a = sample_wavefield(&base, 2.0, &xs, 99).unwrap();
        let b = sample_wavefield(&shifted, 2.0, &xs_shifted, 99).unwrap();
        for (u, v) in a.values.iter().zip(&b.values) {
            assert_relative_eq!(u.norm(), v.norm(), epsilon = 1e-12);
        }
    }

    #[test]
    fn wavefield_mean_is_zero_within_monte_carlo_error() {
        let mu = unit_field(50);
        let xs = [-0.5, 1.5];
        let n = 10_000;
        let mut sums = [Complex64::new(0.0, 0.0); 2];
        let mut sq = [0.0f64; 2];
        for seed in 0..n {
            let s = sample_wavefield(&mu, 1.0, &xs, seed).unwrap();
            for (i, v) in s.values.iter().enumerate() {
                sums[i] += v;
                sq[i] += v.norm_sqr();
            }
        }
        for i in 0..2 {
            let mean = sums[i] / n as f64;
            let se = (sq[i] / n as f64).sqrt() / (n as f64).sqrt();
            assert!(mean.norm() <= 3.0 * se, "mean {} vs 3·SE {}", mean.norm(), 3.0 * se);
        }
    }

    #[test]
    fn second_moment_matches_the_ito_identity() {
        // E|u|² = (1/4ν²)·∫₀¹1 dy, and the right-endpoint sum makes the
        // discrete integral exactly 1.
        let mu = unit_field(200);
        let xs = default_observation_points(8).unwrap();
        for (nu, target) in [(1.0, 0.25), (2.0, 0.0625)] {
            let samples: Vec<WavefieldSample> = (0..2000)
                .map(|s| sample_wavefield(&mu, nu, &xs, 1000 + s).unwrap())
                .collect();
            let m2 = empirical_second_moment(&samples).unwrap();
            // capped-error check with the per-point standard error
            for (i, &v) in m2.iter().enumerate() {
                let var: f64 = samples
                    .iter()
                    .map(|s| (s.values[i].norm_sqr() - v).powi(2))
                    .sum::<f64>()
                    / (samples.len() as f64 - 1.0);
                let se = (var / samples.len() as f64).sqrt();
                assert!((v - target).abs() <= 3.0 * se, "ν={nu} point {i}: {v} vs {target}");
            }
            // the identity's right side has no x: spread stays within 6·SE
            let lo = m2.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = m2.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let se_scale = target / (samples.len() as f64).sqrt();
            assert!(hi - lo <= 6.0 * se_scale, "spread {} vs {}", hi - lo, 6.0 * se_scale);
        }
    }

    #[test]
    fn second_moment_rejects_mixed_or_empty_input() {
        let mu = unit_field(20);
        assert!(empirical_second_moment(&[]).is_err());
        let a = sample_wavefield(&mu, 1.0, &[2.0], 1).unwrap();
        let b = sample_wavefield(&mu, 2.0, &[2.0], 1).unwrap();
        assert!(empirical_second_moment(&[a, b]).is_err());
    }

    #[test]
    fn zero_samples_average_to_exact_zero() {
        let grid = Grid::uniform(0.0, 1.0, 10).unwrap();
        let zero = StrengthField::new(grid, vec![0.0; 10]).unwrap();
        let samples: Vec<_> =
            (0..5).map(|s| sample_wavefield(&zero, 1.0, &[1.5], s).unwrap()).collect();
        assert_eq!(empirical_second_moment(&samples).unwrap(), vec![0.0]);
    }

    #[test]
    fn observation_layout_stays_outside_the_source_interval() {
        let xs = default_observation_points(200).unwrap();
        assert_eq!(xs.len(), 200);
        let eps = 1e-12;
        for &x in &xs {
            assert!(
                (-1.2 - eps..=-0.2 + eps).contains(&x) || (1.2 - eps..=2.2 + eps).contains(&x),
                "observation point {x} inside the excluded region"
            );
        }
        assert!(default_observation_points(3).is_err());
        assert!(default_observation_points(7).is_err());
    }

    #[test]
    fn strength_constructors_enforce_the_sign_contract() {
        let grid = Grid::uniform(0.0, 1.0, 3).unwrap();
        assert!(StrengthField::new(grid.clone(), vec![0.0, 1.0, 2.0]).is_ok());
        assert!(StrengthField::new(grid.clone(), vec![0.0, -1.0, 2.0]).is_err());
        let rec = StrengthField::reconstruction(grid.clone(), vec![0.0, -1.0, 2.0]).unwrap();
        assert!(rec.has_negative());
        assert!(StrengthField::new(grid, vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn frequency_set_validates_order_and_sign() {
        assert!(FrequencySet::new(vec![1.0, 2.0, 3.0]).is_ok());
        assert!(FrequencySet::new(vec![]).is_err());
        assert!(FrequencySet::new(vec![0.0, 1.0]).is_err());
        assert!(FrequencySet::new(vec![1.0, 1.0]).is_err());
        assert!(FrequencySet::new(vec![2.0, 1.0]).is_err());
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn kernel_is_symmetric_and_bounded(
                nu in 0.1f64..20.0,
                x in -2.0f64..3.0,
                y in -2.0f64..3.0,
            ) {
                let k = kernel(nu, x, y);
                prop_assert_eq!(k, kernel(nu, y, x));
                prop_assert!((0.0..=1.0).contains(&k));
            }

            #[test]
            fn kernel_decomposes_into_mean_plus_oscillation(
                nu in 0.1f64..20.0,
                x in -2.0f64..3.0,
                y in -2.0f64..3.0,
            ) {
                let direct = kernel(nu, x, y);
                let split = 0.5 + 0.5 * (4.0 * nu * (x - y).abs()).cos();
                prop_assert!((direct - split).abs() <= 1e-14);
            }

            #[test]
            fn forward_of_nonnegative_strength_is_nonnegative(
                nu in 0.1f64..10.0,
                seed in 0u64..1000,
            ) {
                let grid = Grid::uniform(0.0, 1.0, 40).unwrap();
                let vals: Vec<f64> = (0..40)
                    .map(|j| ((seed as f64 + j as f64) * 0.7).sin().abs())
                    .collect();
                let mu = StrengthField::new(grid, vals).unwrap();
                let out = apply_forward(&mu, nu, &[-0.5, 1.3, 2.1]).unwrap();
                prop_assert!(out.iter().all(|&v| v >= 0.0));
            }
        }
    }
}
