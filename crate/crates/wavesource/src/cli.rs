//! Batch experiment layer: JSON configs, named benchmark sources, and the
//! runner that turns a config into CSV/JSON artifacts on disk.
//!
//! A config selects one of the two pipelines:
//!
//! * `"kind": "helmholtz"` — synthesize multi-frequency second-moment data
//!   for a named strength preset, invert by Tikhonov over the stacked
//!   frequency blocks, and write the truth, the reconstruction, the data, and
//!   spectrum diagnostics.
//! * `"kind": "levy"` — simulate a seeded ensemble of terminal wavefield
//!   snapshots, reduce to modal statistics, recover f from the mean and g
//!   from the covariance, and write truths, reconstructions, statistics, and
//!   errors.
//!
//! Every float leaving through CSV is printed with 17 significant digits so
//! files round-trip bit-exactly; rows carry a single header line and are
//! comma-separated. Runs are deterministic in (config, seed): reruns write
//! byte-identical artifacts.

use crate::error::{Error, Result};
use crate::grid_basis::{Grid, SineBasis};
use crate::helmholtz_forward::{
    assemble_matrix_with, default_observation_points, synth_observations_oversampled,
    synth_observations_with, FrequencySet, KernelVariant, ObservationSet, StrengthField,
};
use crate::levy_forward::{
    energy_bound_check, ensemble_statistics, simulate_ensemble, LevyParams, SourcePair,
};
use crate::levy_inverse::{
    reconstruct_f, reconstruct_g, relative_l2_error, SignPolicy, TimeKernelMatrix,
};
use crate::tikhonov::{
    choose_alpha, condition_diagnostics, stack_frequencies, tikhonov_solve, ConditionReport,
};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Default directory that receives artifacts when neither the config nor the
/// command line names one.
pub const DEFAULT_OUTPUT_DIR: &str = "results";

/// Oversampling factor used to sidestep the inverse crime: synthetic data
/// comes from a source grid this many times finer than the inversion grid.
pub const OVERSAMPLE_FACTOR: usize = 2;

// ---------------------------------------------------------------------------
// Config schema
// ---------------------------------------------------------------------------

/// Top-level experiment description, deserialized from JSON. Unknown fields
/// are rejected so typos fail loudly instead of silently using defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// "helmholtz" or "levy".
    pub kind: String,
    /// Master seed; the `--seed` flag overrides it.
    #[serde(default)]
    pub seed: u64,
    /// Artifact directory; the `--output-dir` flag overrides it.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub helmholtz: Option<HelmholtzConfig>,
    #[serde(default)]
    pub levy: Option<LevyConfig>,
}

/// Settings of the strength-recovery pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HelmholtzConfig {
    /// Name of the benchmark strength (see [`helmholtz_preset_names`]).
    pub true_mu: String,
    /// Probing frequencies, strictly increasing and positive.
    #[serde(default = "default_freqs")]
    pub freqs: Vec<f64>,
    /// Observation points (split between the two exterior blocks).
    #[serde(default = "default_m")]
    pub m: usize,
    /// Source-grid cells on [0, 1].
    #[serde(default = "default_n")]
    pub n: usize,
    /// Regularization weight; omitted ⇒ proportional to the noise level
    /// (with a tiny floor for noise-free runs).
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Standard deviation of the additive observation noise.
    #[serde(default)]
    pub noise_level: f64,
    /// Design kernel: "cos2_2nu" (default), "cos2_nu", or "cos_2nu".
    #[serde(default = "default_kernel")]
    pub kernel_variant: String,
    /// Generate data on a finer source grid than the inversion uses.
    #[serde(default)]
    pub oversample: bool,
}

/// Settings of the Lévy-driven amplitude-recovery pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyConfig {
    /// Name of the deterministic amplitude f (see [`levy_preset_names`]).
    pub true_f: String,
    /// Name of the stochastic amplitude g.
    pub true_g: String,
    /// Time horizon T.
    #[serde(default = "default_t")]
    pub t_horizon: f64,
    /// Number of recovered modes K.
    #[serde(default = "default_k")]
    pub k_modes: usize,
    /// Space cells on [0, π].
    #[serde(default = "default_nx")]
    pub n_x: usize,
    /// Time steps on [0, T].
    #[serde(default = "default_nt")]
    pub n_t: usize,
    /// Monte Carlo ensemble size.
    #[serde(default = "default_nsamples")]
    pub n_samples: usize,
    /// Driving-process coefficients.
    #[serde(default)]
    pub levy: LevyParamsConfig,
    /// Standard deviation σ_ε of the pointwise measurement noise.
    #[serde(default = "default_noise")]
    pub noise_level: f64,
    /// Damping weight of the covariance fit.
    #[serde(default = "default_fit_alpha")]
    pub fit_alpha: f64,
    /// "anchor_first_mode" (default), "magnitude", or "oracle_sign".
    #[serde(default = "default_sign_policy")]
    pub sign_policy: String,
    /// Covariance noise floor; omitted ⇒ the analytic value σ_ε²·Δx.
    #[serde(default)]
    pub noise_floor: Option<f64>,
}

/// Driver coefficients with the benchmark defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyParamsConfig {
    #[serde(default)]
    pub b: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_lambda_p")]
    pub lambda_p: f64,
    #[serde(default = "default_sigma_j")]
    pub sigma_j: f64,
}

impl Default for LevyParamsConfig {
    fn default() -> Self {
        LevyParamsConfig { b: 0.0, sigma: 0.1, lambda_p: 5.0, sigma_j: 0.1 }
    }
}

fn default_freqs() -> Vec<f64> {
    (1..=10).map(f64::from).collect()
}
fn default_m() -> usize {
    200
}
fn default_n() -> usize {
    200
}
fn default_kernel() -> String {
    "cos2_2nu".into()
}
fn default_t() -> f64 {
    1.0
}
fn default_k() -> usize {
    5
}
fn default_nx() -> usize {
    100
}
fn default_nt() -> usize {
    1000
}
fn default_nsamples() -> usize {
    2000
}
fn default_noise() -> f64 {
    0.001
}
fn default_fit_alpha() -> f64 {
    1e-10
}
fn default_sign_policy() -> String {
    "anchor_first_mode".into()
}
fn default_sigma() -> f64 {
    0.1
}
fn default_lambda_p() -> f64 {
    5.0
}
fn default_sigma_j() -> f64 {
    0.1
}

impl ExperimentConfig {
    /// Parses a JSON string and cross-validates it.
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads and parses a config file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Checks the cross-field invariants the type system cannot.
    pub fn validate(&self) -> Result<()> {
        match self.kind.as_str() {
            "helmholtz" => {
                let section = self.helmholtz.as_ref().ok_or_else(|| {
                    Error::Config("kind \"helmholtz\" needs a \"helmholtz\" section".into())
                })?;
                if self.levy.is_some() {
                    return Err(Error::Config(
                        "kind \"helmholtz\" must not carry a \"levy\" section".into(),
                    ));
                }
                section.validate()
            }
            "levy" => {
                let section = self.levy.as_ref().ok_or_else(|| {
                    Error::Config("kind \"levy\" needs a \"levy\" section".into())
                })?;
                if self.helmholtz.is_some() {
                    return Err(Error::Config(
                        "kind \"levy\" must not carry a \"helmholtz\" section".into(),
                    ));
                }
                section.validate()
            }
            other => Err(Error::Config(format!(
                "unknown kind {other:?}; expected \"helmholtz\" or \"levy\""
            ))),
        }
    }
}

impl HelmholtzConfig {
    fn validate(&self) -> Result<()> {
        helmholtz_preset(&self.true_mu)?;
        parse_kernel_variant(&self.kernel_variant)?;
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if let Some(alpha) = self.alpha {
            if !(alpha > 0.0) || !alpha.is_finite() {
                return Err(Error::Config(format!(
                    "alpha must be positive and finite, got {alpha}"
                )));
            }
        }
        if self.noise_level < 0.0 {
            return Err(Error::Config(format!(
                "noise_level must be non-negative, got {}",
                self.noise_level
            )));
        }
        FrequencySet::new(self.freqs.clone()).map_err(|e| Error::Config(e.to_string()))?;
        default_observation_points(self.m).map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

impl LevyConfig {
    fn validate(&self) -> Result<()> {
        levy_preset(&self.true_f)?;
        levy_preset(&self.true_g)?;
        parse_sign_policy(&self.sign_policy, &[])?;
        LevyParams::new(self.levy.b, self.levy.sigma, self.levy.lambda_p, self.levy.sigma_j)
            .map_err(|e| Error::Config(e.to_string()))?;
        if !(self.t_horizon > 0.0) || !self.t_horizon.is_finite() {
            return Err(Error::Config(format!(
                "t_horizon must be positive and finite, got {}",
                self.t_horizon
            )));
        }
        for (name, v) in [("k_modes", self.k_modes), ("n_x", self.n_x), ("n_t", self.n_t)] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if self.n_samples < 2 {
            return Err(Error::Config(format!(
                "n_samples must be at least 2 for covariance statistics, got {}",
                self.n_samples
            )));
        }
        if self.noise_level < 0.0 {
            return Err(Error::Config(format!(
                "noise_level must be non-negative, got {}",
                self.noise_level
            )));
        }
        if !(self.fit_alpha >= 0.0) {
            return Err(Error::Config(format!(
                "fit_alpha must be non-negative, got {}",
                self.fit_alpha
            )));
        }
        if let Some(floor) = self.noise_floor {
            if !(floor >= 0.0) || !floor.is_finite() {
                return Err(Error::Config(format!(
                    "noise_floor must be non-negative and finite, got {floor}"
                )));
            }
        }
        Ok(())
    }
}

fn parse_kernel_variant(name: &str) -> Result<KernelVariant> {
    match name {
        "cos2_2nu" => Ok(KernelVariant::CosSqTwoNu),
        "cos2_nu" => Ok(KernelVariant::CosSqNu),
        "cos_2nu" => Ok(KernelVariant::CosTwoNu),
        other => Err(Error::Config(format!(
            "unknown kernel_variant {other:?}; expected \"cos2_2nu\", \"cos2_nu\", or \"cos_2nu\""
        ))),
    }
}

fn parse_sign_policy(name: &str, oracle: &[f64]) -> Result<SignPolicy> {
    match name {
        "magnitude" => Ok(SignPolicy::Magnitude),
        "anchor_first_mode" => Ok(SignPolicy::AnchorFirstMode),
        "oracle_sign" => Ok(SignPolicy::OracleSign(oracle.to_vec())),
        other => Err(Error::Config(format!(
            "unknown sign_policy {other:?}; expected \"anchor_first_mode\", \"magnitude\", \
             or \"oracle_sign\""
        ))),
    }
}

// ---------------------------------------------------------------------------
// Benchmark sources
// ---------------------------------------------------------------------------

/// Benchmark strengths on [0, 1] for the Helmholtz pipeline. The first three
/// are non-negative; "iv" and "v" change sign and exercise the solver outside
/// the physical cone.
pub fn helmholtz_preset(name: &str) -> Result<fn(f64) -> f64> {
    use std::f64::consts::E;
    match name {
        "i" => Ok(|y| 0.5 * (1.0 - (2.0 * PI * y).cos())),
        "ii" => Ok(|y| 0.6 - 0.3 * (2.0 * PI * y).cos() - 0.3 * (4.0 * PI * y).cos()),
        "iii" => Ok(|y| {
            0.5 * E - 0.3 * (4.0 * PI * y).cos().exp() - 0.2 * (6.0 * PI * y).cos().exp()
        }),
        "iv" => Ok(|y| 0.5 * (6.0 * PI * y).cos().exp() - 0.3 * (8.0 * PI * y).sin().exp()),
        "v" => Ok(|y| {
            0.6 * E - 0.5 * (6.0 * PI * y).cos().exp() - 0.3 * (8.0 * PI * y).sin().exp()
        }),
        other => Err(Error::Config(format!(
            "unknown strength preset {other:?}; available: {}",
            helmholtz_preset_names().join(", ")
        ))),
    }
}

/// Benchmark amplitudes on [0, π] for the Lévy pipeline.
pub fn levy_preset(name: &str) -> Result<fn(f64) -> f64> {
    match name {
        "sin" => Ok(f64::sin),
        "gaussian_bump" => Ok(|x| (-(x - 0.5 * PI) * (x - 0.5 * PI)).exp()),
        other => Err(Error::Config(format!(
            "unknown amplitude preset {other:?}; available: {}",
            levy_preset_names().join(", ")
        ))),
    }
}

pub fn helmholtz_preset_names() -> Vec<&'static str> {
    vec!["i", "ii", "iii", "iv", "v"]
}

pub fn levy_preset_names() -> Vec<&'static str> {
    vec!["sin", "gaussian_bump"]
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

/// What a run produced, for display and for tests.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub kind: String,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    /// Headline metric: relative L² error of the primary reconstruction
    /// (μ for helmholtz; f for levy).
    pub primary_error: f64,
    /// Secondary metric: None for helmholtz, g's error for levy.
    pub secondary_error: Option<f64>,
}

/// Executes a validated config. `seed`/`output_dir` are the command-line
/// overrides; artifacts land in the resolved output directory, which is
/// created if absent.
pub fn run_experiment(
    config: &ExperimentConfig,
    seed: Option<u64>,
    output_dir: Option<&Path>,
) -> Result<RunSummary> {
    config.validate()?;
    let seed = seed.unwrap_or(config.seed);
    let out: PathBuf = output_dir
        .map(Path::to_path_buf)
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    std::fs::create_dir_all(&out)?;
    match config.kind.as_str() {
        "helmholtz" => run_helmholtz(config.helmholtz.as_ref().expect("validated"), seed, &out),
        "levy" => run_levy(config.levy.as_ref().expect("validated"), seed, &out),
        _ => unreachable!("validated"),
    }
}

#[derive(Serialize)]
struct SpectrumJson {
    sigma_max: f64,
    sigma_min: f64,
    /// None (JSON null) encodes an infinite condition number.
    kappa: Option<f64>,
    effective_rank: usize,
}

impl From<ConditionReport> for SpectrumJson {
    fn from(r: ConditionReport) -> Self {
        SpectrumJson {
            sigma_max: r.sigma_max,
            sigma_min: r.sigma_min_effective,
            kappa: r.kappa.is_finite().then_some(r.kappa),
            effective_rank: r.effective_rank,
        }
    }
}

#[derive(Serialize)]
struct BlockJson {
    nu: f64,
    #[serde(flatten)]
    spectrum: SpectrumJson,
}

#[derive(Serialize)]
struct HelmholtzDiagnostics {
    preset: String,
    seed: u64,
    alpha: f64,
    noise_level: f64,
    relative_l2_error: f64,
    residual_norm: f64,
    solution_norm: f64,
    stacked: SpectrumJson,
    blocks: Vec<BlockJson>,
}

fn run_helmholtz(cfg: &HelmholtzConfig, seed: u64, out: &Path) -> Result<RunSummary> {
    let variant = parse_kernel_variant(&cfg.kernel_variant)?;
    let truth_fn = helmholtz_preset(&cfg.true_mu)?;
    let grid = Grid::uniform(0.0, 1.0, cfg.n)?;
    let mu_true = StrengthField::from_fn(grid.clone(), truth_fn)?;
    let freqs = FrequencySet::new(cfg.freqs.clone())?;
    let obs_points = default_observation_points(cfg.m)?;

    let observations: ObservationSet = if cfg.oversample {
        if variant != KernelVariant::CosSqTwoNu {
            return Err(Error::Config(
                "oversampled synthesis is only wired for the canonical kernel".into(),
            ));
        }
        synth_observations_oversampled(
            truth_fn,
            &grid,
            OVERSAMPLE_FACTOR,
            &freqs,
            &obs_points,
            cfg.noise_level,
            seed,
        )?
    } else {
        synth_observations_with(variant, &mu_true, &freqs, &obs_points, cfg.noise_level, seed)?
    };

    let blocks: Vec<_> = freqs
        .freqs()
        .iter()
        .map(|&nu| assemble_matrix_with(variant, nu, &obs_points, &grid))
        .collect::<Result<_>>()?;
    let block_reports: Vec<BlockJson> = blocks
        .iter()
        .zip(freqs.freqs())
        .map(|(b, &nu)| Ok(BlockJson { nu, spectrum: condition_diagnostics(b)?.into() }))
        .collect::<Result<_>>()?;
    let data_blocks: Vec<Vec<f64>> = (0..freqs.len())
        .map(|k| observations.data.column(k).iter().copied().collect())
        .collect();
    let (design, h) = stack_frequencies(blocks, &data_blocks)?;
    let alpha = match cfg.alpha {
        Some(a) => a,
        None => choose_alpha(cfg.noise_level, 1.0)?,
    };
    let solution = tikhonov_solve(&design.stacked, &h, alpha)?;
    let stacked_report = condition_diagnostics(&design.stacked)?;

    let dy = grid.spacing();
    let rel_err = rel_l2_nodes(mu_true.values(), &solution.mu_alpha, dy)?;

    // artifacts
    let nodes: Vec<f64> = mu_true.nodes().collect();
    write_csv(
        &out.join("mu_true.csv"),
        "y,value",
        nodes.iter().zip(mu_true.values()).map(|(&y, &v)| vec![y, v]),
    )?;
    write_csv(
        &out.join("mu_rec.csv"),
        "y,value",
        nodes.iter().zip(&solution.mu_alpha).map(|(&y, &v)| vec![y, v]),
    )?;
    write_csv(
        &out.join("observations.csv"),
        "x,nu,value",
        freqs.freqs().iter().enumerate().flat_map(|(k, &nu)| {
            let obs = &observations;
            obs_points
                .iter()
                .enumerate()
                .map(move |(i, &x)| vec![x, nu, obs.data[(i, k)]])
        }),
    )?;
    let diagnostics = HelmholtzDiagnostics {
        preset: cfg.true_mu.clone(),
        seed,
        alpha,
        noise_level: cfg.noise_level,
        relative_l2_error: rel_err,
        residual_norm: solution.residual_norm,
        solution_norm: solution.solution_norm,
        stacked: stacked_report.into(),
        blocks: block_reports,
    };
    write_json(&out.join("diagnostics.json"), &diagnostics)?;

    Ok(RunSummary {
        kind: "helmholtz".into(),
        seed,
        output_dir: out.to_path_buf(),
        files: vec![
            "mu_true.csv".into(),
            "mu_rec.csv".into(),
            "observations.csv".into(),
            "diagnostics.json".into(),
        ],
        primary_error: rel_err,
        secondary_error: None,
    })
}

#[derive(Serialize)]
struct LevyStats {
    n_samples: usize,
    modal_mean: Vec<f64>,
    modal_cov: Vec<Vec<f64>>,
    energy: EnergyJson,
}

#[derive(Serialize)]
struct EnergyJson {
    estimate: f64,
    bound: f64,
}

#[derive(Serialize)]
struct LevyErrors {
    preset_f: String,
    preset_g: String,
    seed: u64,
    eps_f: f64,
    eps_g: f64,
    fit_iterations: usize,
    fit_grad_norm: f64,
}

fn run_levy(cfg: &LevyConfig, seed: u64, out: &Path) -> Result<RunSummary> {
    let f_fn = levy_preset(&cfg.true_f)?;
    let g_fn = levy_preset(&cfg.true_g)?;
    let grid = Grid::uniform(0.0, PI, cfg.n_x)?;
    let basis = SineBasis::new(PI, cfg.k_modes)?;
    let h_values = vec![1.0; cfg.n_t + 1];
    let sources = SourcePair::from_fns(grid.clone(), basis, f_fn, g_fn, h_values)?;
    let params =
        LevyParams::new(cfg.levy.b, cfg.levy.sigma, cfg.levy.lambda_p, cfg.levy.sigma_j)?;

    let ensemble = simulate_ensemble(
        &sources,
        &params,
        cfg.t_horizon,
        cfg.k_modes,
        cfg.n_samples,
        cfg.noise_level,
        seed,
    )?;
    let stats = ensemble_statistics(&ensemble, &basis, cfg.k_modes)?;
    let kernels = TimeKernelMatrix::new(&basis, cfg.t_horizon, sources.h_values())?;
    let noise_floor = cfg
        .noise_floor
        .unwrap_or_else(|| cfg.noise_level * cfg.noise_level * grid.spacing());
    let policy = parse_sign_policy(&cfg.sign_policy, sources.g_coeffs())?;
    let fit = reconstruct_g(&stats, &kernels, &params, cfg.fit_alpha, noise_floor, &policy)?;
    let f_coeffs = reconstruct_f(&stats, &kernels, &params, Some(&fit.g_coeffs))?;
    let energy = energy_bound_check(&sources, &params, cfg.t_horizon, cfg.n_samples, seed)?;

    let f_rec = basis.synthesize(&f_coeffs, &grid)?;
    let g_rec = basis.synthesize(&fit.g_coeffs, &grid)?;
    let eps_f = relative_l2_error(sources.f_values(), &f_rec, &grid)?;
    let eps_g = relative_l2_error(sources.g_values(), &g_rec, &grid)?;

    let xs = grid.points();
    write_csv(
        &out.join("f_true.csv"),
        "x,value",
        xs.iter().zip(sources.f_values()).map(|(&x, &v)| vec![x, v]),
    )?;
    write_csv(
        &out.join("f_rec.csv"),
        "x,value",
        xs.iter().zip(&f_rec).map(|(&x, &v)| vec![x, v]),
    )?;
    write_csv(
        &out.join("g_true.csv"),
        "x,value",
        xs.iter().zip(sources.g_values()).map(|(&x, &v)| vec![x, v]),
    )?;
    write_csv(
        &out.join("g_rec.csv"),
        "x,value",
        xs.iter().zip(&g_rec).map(|(&x, &v)| vec![x, v]),
    )?;
    let stats_json = LevyStats {
        n_samples: stats.n_samples,
        modal_mean: stats.mean.clone(),
        modal_cov: (0..cfg.k_modes)
            .map(|r| (0..cfg.k_modes).map(|c| stats.cov[(r, c)]).collect())
            .collect(),
        energy: EnergyJson { estimate: energy.estimate, bound: energy.bound },
    };
    write_json(&out.join("stats.json"), &stats_json)?;
    let errors = LevyErrors {
        preset_f: cfg.true_f.clone(),
        preset_g: cfg.true_g.clone(),
        seed,
        eps_f,
        eps_g,
        fit_iterations: fit.iterations,
        fit_grad_norm: fit.grad_norm,
    };
    write_json(&out.join("errors.json"), &errors)?;

    Ok(RunSummary {
        kind: "levy".into(),
        seed,
        output_dir: out.to_path_buf(),
        files: vec![
            "f_true.csv".into(),
            "f_rec.csv".into(),
            "g_true.csv".into(),
            "g_rec.csv".into(),
            "stats.json".into(),
            "errors.json".into(),
        ],
        primary_error: eps_f,
        secondary_error: Some(eps_g),
    })
}

/// Relative L² error between two node vectors sharing one spacing.
fn rel_l2_nodes(truth: &[f64], rec: &[f64], spacing: f64) -> Result<f64> {
    if truth.len() != rec.len() {
        return Err(Error::Domain(format!(
            "error norm needs equal lengths, got {} and {}",
            truth.len(),
            rec.len()
        )));
    }
    let diff: f64 = truth.iter().zip(rec).map(|(t, r)| (t - r) * (t - r)).sum::<f64>() * spacing;
    let base: f64 = truth.iter().map(|t| t * t).sum::<f64>() * spacing;
    if base == 0.0 {
        return Err(Error::Domain("relative error against an identically zero truth".into()));
    }
    Ok((diff / base).sqrt())
}

/// Writes one CSV file: a single header row, comma separation, every float
/// with 17 significant digits (`{:.16e}`), one trailing newline.
fn write_csv(
    path: &Path,
    header: &str,
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> Result<()> {
    let mut text = String::new();
    text.push_str(header);
    text.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                text.push(',');
            }
            write!(text, "{v:.16e}").expect("string write");
            first = false;
        }
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn helmholtz_json() -> String {
        r#"{
            "kind": "helmholtz",
            "seed": 3,
            "helmholtz": {"true_mu": "i", "freqs": [1.0, 2.0], "m": 16, "n": 40}
        }"#
        .to_string()
    }

    #[test]
    fn config_parses_with_defaults_filled_in() {
        let cfg = ExperimentConfig::from_json(&helmholtz_json()).unwrap();
        assert_eq!(cfg.kind, "helmholtz");
        assert_eq!(cfg.seed, 3);
        let h = cfg.helmholtz.unwrap();
        assert_eq!(h.m, 16);
        assert_eq!(h.kernel_variant, "cos2_2nu");
        assert_eq!(h.alpha, None);
        assert!(!h.oversample);
    }

    #[test]
    fn config_rejects_unknown_fields_and_bad_kinds() {
        assert!(ExperimentConfig::from_json(r#"{"kind": "helmholtz", "typo": 1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"kind": "other"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"kind": "helmholtz"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"kind": "levy"}"#).is_err());
        // section mismatching the kind
        let mixed = r#"{
            "kind": "levy",
            "levy": {"true_f": "sin", "true_g": "sin"},
            "helmholtz": {"true_mu": "i"}
        }"#;
        assert!(ExperimentConfig::from_json(mixed).is_err());
    }

    #[test]
    fn config_validates_preset_and_parameter_ranges() {
        let bad_preset = r#"{"kind": "helmholtz", "helmholtz": {"true_mu": "vi"}}"#;
        assert!(ExperimentConfig::from_json(bad_preset).is_err());
        let bad_freqs =
            r#"{"kind": "helmholtz", "helmholtz": {"true_mu": "i", "freqs": [2.0, 1.0]}}"#;
        assert!(ExperimentConfig::from_json(bad_freqs).is_err());
        let bad_policy = r#"{
            "kind": "levy",
            "levy": {"true_f": "sin", "true_g": "sin", "sign_policy": "guess"}
        }"#;
        assert!(ExperimentConfig::from_json(bad_policy).is_err());
        let bad_sigma = r#"{
            "kind": "levy",
            "levy": {"true_f": "sin", "true_g": "sin", "levy": {"sigma": -0.1}}
        }"#;
        assert!(ExperimentConfig::from_json(bad_sigma).is_err());
    }

    #[test]
    fn presets_have_the_advertised_signs() {
        // the first three stay non-negative on a fine sweep; iv and v dip below
        for name in ["i", "ii", "iii"] {
            let f = helmholtz_preset(name).unwrap();
            let min = (0..=2000).map(|j| f(j as f64 / 2000.0)).fold(f64::INFINITY, f64::min);
            assert!(min >= -1e-12, "preset {name} has min {min}");
        }
        for name in ["iv", "v"] {
            let f = helmholtz_preset(name).unwrap();
            let min = (0..=2000).map(|j| f(j as f64 / 2000.0)).fold(f64::INFINITY, f64::min);
            assert!(min < 0.0, "preset {name} unexpectedly non-negative");
        }
        assert!(helmholtz_preset("nope").is_err());
        assert!(levy_preset("nope").is_err());
        // amplitude presets peak where expected
        let bump = levy_preset("gaussian_bump").unwrap();
        assert!((bump(0.5 * PI) - 1.0).abs() <= 1e-15);
        assert!(bump(0.0) < bump(0.5 * PI));
    }

    #[test]
    fn preset_values_match_hand_evaluations() {
        let e = std::f64::consts::E;
        let i = helmholtz_preset("i").unwrap();
        assert!((i(0.0) - 0.0).abs() <= 1e-15);
        assert!((i(0.25) - 0.5).abs() <= 1e-15);
        assert!((i(0.5) - 1.0).abs() <= 1e-15);
        let ii = helmholtz_preset("ii").unwrap();
        assert!((ii(0.0) - 0.0).abs() <= 1e-15);
        let iii = helmholtz_preset("iii").unwrap();
        assert!((iii(0.0) - (0.5 * e - 0.3 * e - 0.2 * e)).abs() <= 1e-15);
        let v = helmholtz_preset("v").unwrap();
        assert!((v(0.0) - (0.6 * e - 0.5 * e - 0.3)).abs() <= 1e-12);
    }

    #[test]
    fn runner_writes_the_full_helmholtz_artifact_set() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::from_json(&helmholtz_json()).unwrap();
        let summary = run_experiment(&cfg, None, Some(dir.path())).unwrap();
        assert_eq!(summary.kind, "helmholtz");
        assert_eq!(summary.seed, 3);
        for f in ["mu_true.csv", "mu_rec.csv", "observations.csv", "diagnostics.json"] {
            assert!(dir.path().join(f).is_file(), "missing {f}");
        }
        let diag: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("diagnostics.json")).unwrap())
                .unwrap();
        assert!(diag["relative_l2_error"].as_f64().unwrap() >= 0.0);
        assert_eq!(diag["blocks"].as_array().unwrap().len(), 2);
        assert!(diag["stacked"]["kappa"].is_null(), "rank-deficient stack must report null");
        assert_eq!(diag["stacked"]["effective_rank"].as_u64().unwrap(), 5);
        // CSV shape: single header + one row per node
        let mu = std::fs::read_to_string(dir.path().join("mu_true.csv")).unwrap();
        let lines: Vec<&str> = mu.lines().collect();
        assert_eq!(lines[0], "y,value");
        assert_eq!(lines.len(), 41);
        assert!(lines[1].matches(',').count() == 1);
        // 17 significant digits
        assert!(lines[1].contains('e'), "floats must use scientific notation: {}", lines[1]);
    }

    #[test]
    fn runner_is_deterministic_and_seed_overridable() {
        let cfg = ExperimentConfig::from_json(&helmholtz_json()).unwrap();
        let (a, b, c) = (
            tempfile::tempdir().unwrap(),
            tempfile::tempdir().unwrap(),
            tempfile::tempdir().unwrap(),
        );
        run_experiment(&cfg, None, Some(a.path())).unwrap();
        run_experiment(&cfg, None, Some(b.path())).unwrap();
        run_experiment(&cfg, Some(99), Some(c.path())).unwrap();
        for f in ["mu_true.csv", "mu_rec.csv", "observations.csv", "diagnostics.json"] {
            let x = std::fs::read(a.path().join(f)).unwrap();
            let y = std::fs::read(b.path().join(f)).unwrap();
            assert_eq!(x, y, "{f} differs between identical runs");
        }
        // identical configs with different seeds agree on the truth…
        assert_eq!(
            std::fs::read(a.path().join("mu_true.csv")).unwrap(),
            std::fs::read(c.path().join("mu_true.csv")).unwrap()
        );
    }

    #[test]
    fn runner_writes_the_full_levy_artifact_set() {
        let dir = tempfile::tempdir().unwrap();
        let json = r#"{
            "kind": "levy",
            "seed": 1,
            "levy": {
                "true_f": "sin", "true_g": "sin",
                "k_modes": 3, "n_x": 40, "n_t": 100, "n_samples": 64
            }
        }"#;
        let cfg = ExperimentConfig::from_json(json).unwrap();
        let summary = run_experiment(&cfg, None, Some(dir.path())).unwrap();
        assert_eq!(summary.kind, "levy");
        assert!(summary.secondary_error.is_some());
        for f in ["f_true.csv", "f_rec.csv", "g_true.csv", "g_rec.csv", "stats.json", "errors.json"]
        {
            assert!(dir.path().join(f).is_file(), "missing {f}");
        }
        let stats: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("stats.json")).unwrap())
                .unwrap();
        assert_eq!(stats["n_samples"].as_u64().unwrap(), 64);
        assert_eq!(stats["modal_mean"].as_array().unwrap().len(), 3);
        assert_eq!(stats["modal_cov"].as_array().unwrap().len(), 3);
        assert!(stats["energy"]["estimate"].as_f64().unwrap() > 0.0);
        let errors: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("errors.json")).unwrap())
                .unwrap();
        assert!(errors["eps_f"].as_f64().unwrap() >= 0.0);
        assert!(errors["eps_g"].as_f64().unwrap() >= 0.0);
    }

    #[test]
    fn csv_floats_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let values = [PI, 1.0 / 3.0, 7.25e-11, -0.0, 123456.789012345];
        write_csv(&path, "a", values.iter().map(|&v| vec![v])).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        for (line, &v) in text.lines().skip(1).zip(&values) {
            let back: f64 = line.parse().unwrap();
            assert_eq!(back, v, "{line} did not round-trip");
        }
    }

    #[test]
    fn output_dir_resolution_prefers_the_command_line() {
        let base = tempfile::tempdir().unwrap();
        let from_config = base.path().join("cfg");
        let from_cli = base.path().join("cli");
        let mut cfg = ExperimentConfig::from_json(&helmholtz_json()).unwrap();
        cfg.output_dir = Some(from_config.clone());
        run_experiment(&cfg, None, None).unwrap();
        assert!(from_config.join("mu_rec.csv").is_file());
        run_experiment(&cfg, None, Some(&from_cli)).unwrap();
        assert!(from_cli.join("mu_rec.csv").is_file());
    }
}
