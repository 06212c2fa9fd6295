//! Minimal multi-frequency strength reconstruction, end to end: synthesize
//! noisy variance data for a known truth, stack the per-frequency operators,
//! solve, and report the error. (This is the README walkthrough.)

use wavesource::grid_basis::Grid;
use wavesource::helmholtz_forward::{
    assemble_matrix, default_observation_points, synth_observations, FrequencySet,
    StrengthField,
};
use wavesource::tikhonov::{stack_frequencies, tikhonov_solve};

fn main() -> wavesource::Result<()> {
    let grid = Grid::uniform(0.0, 1.0, 200)?;
    let truth = StrengthField::from_fn(grid.clone(), |y| {
        0.5 * (1.0 - (2.0 * std::f64::consts::PI * y).cos())
    })?;
    let freqs = FrequencySet::new(vec![1.0, 2.0, 3.0])?;
    let obs_points = default_observation_points(200)?;
    let observations = synth_observations(&truth, &freqs, &obs_points, 1e-3, 7)?;

    let blocks = freqs
        .freqs()
        .iter()
        .map(|&nu| assemble_matrix(nu, &obs_points, &grid))
        .collect::<wavesource::Result<Vec<_>>>()?;
    let data: Vec<Vec<f64>> = (0..freqs.len())
        .map(|k| observations.data.column(k).iter().copied().collect())
        .collect();
    let (design, h) = stack_frequencies(blocks, &data)?;
    let solution = tikhonov_solve(&design.stacked, &h, 1e-3)?;

    let num: f64 = truth
        .values()
        .iter()
        .zip(&solution.mu_alpha)
        .map(|(t, r)| (t - r) * (t - r))
        .sum::<f64>()
        .sqrt();
    let den: f64 = truth.values().iter().map(|t| t * t).sum::<f64>().sqrt();
    println!("residual {:.3e}", solution.residual_norm);
    println!("relative L2 error {:.3e}", num / den);
    Ok(())
}
