//! Uniform grids, quadrature, and the Dirichlet sine eigenbasis of the 1-D
//! Laplacian, shared by both reconstruction pipelines.
//!
//! The basis diagonalizes −d²/dx² on (0, L) with zero boundary values:
//!
//! ```text
//! φ_k(x) = √(2/L)·sin(kπx/L),   λ_k = (kπ/L)²,   k = 1, 2, …
//! ```
//!
//! With L = π (the wave-equation pipeline's domain) the eigenvalues are
//! exactly k². Projection and synthesis use the plain rectangle sum over all
//! grid points with weight Δx; because every φ_k vanishes at both endpoints
//! this coincides with the trapezoid rule, which is kept available as an
//! independent cross-check.

use crate::error::{Error, Result};

/// Uniform partition of [a, b] into `n` cells (`n + 1` points).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    n: usize,
    points: Vec<f64>,
    spacing: f64,
}

impl Grid {
    /// Builds the uniform grid over [a, b] with `n` cells.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(b > a) {
            return Err(Error::Domain(format!(
                "grid endpoints must satisfy b > a, got a = {a}, b = {b}"
            )));
        }
        if n == 0 {
            return Err(Error::Domain("grid needs at least one cell".into()));
        }
        let spacing = (b - a) / n as f64;
        let mut points: Vec<f64> = (0..=n).map(|i| a + i as f64 * spacing).collect();
        // Pin the right endpoint so points[n] == b holds exactly.
        points[n] = b;
        Ok(Grid { a, b, n, points, spacing })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Cell count (one less than the number of points).
    pub fn n(&self) -> usize {
        self.n
    }

    /// The `n + 1` grid points, ascending.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Integrates point samples over the grid with the chosen rule.
    ///
    /// `Rectangle` weights every one of the `n + 1` samples by Δ (the
    /// convention both pipelines inherit); `Trapezoid` halves the endpoint
    /// weights. The two agree whenever the integrand vanishes at a and b.
    pub fn integrate(&self, values: &[f64], rule: Quadrature) -> Result<f64> {
        if values.len() != self.points.len() {
            return Err(Error::Domain(format!(
                "integrand has {} samples but the grid has {} points",
                values.len(),
                self.points.len()
            )));
        }
        let mut sum: f64 = values.iter().sum();
        if rule == Quadrature::Trapezoid {
            sum -= 0.5 * (values[0] + values[self.n]);
        }
        Ok(sum * self.spacing)
    }
}

/// Quadrature rule for grid sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    /// All `n + 1` points weighted by Δ.
    Rectangle,
    /// Endpoint weights halved.
    Trapezoid,
}

/// Sine eigenbasis of the Dirichlet Laplacian on (0, L), modes 1..=K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineBasis {
    length: f64,
    modes: usize,
}

impl SineBasis {
    pub fn new(length: f64, modes: usize) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::Domain(format!("domain length must be positive, got {length}")));
        }
        if modes == 0 {
            return Err(Error::Domain("basis needs at least one mode".into()));
        }
        Ok(SineBasis { length, modes })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Eigenvalue λ_k = (kπ/L)²; exactly k² when L = π.
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        let w = self.frequency(k)?;
        Ok(w * w)
    }

    /// Temporal frequency ω_k = kπ/L = √λ_k; exactly k when L = π.
    pub fn frequency(&self, k: usize) -> Result<f64> {
        self.check_mode(k)?;
        Ok(k as f64 * (std::f64::consts::PI / self.length))
    }

    /// Evaluates φ_k(x) = √(2/L)·sin(kπx/L).
    pub fn eval(&self, k: usize, x: f64) -> Result<f64> {
        self.check_mode(k)?;
        if !(0.0..=self.length).contains(&x) {
            return Err(Error::Domain(format!(
                "x = {x} outside the basis domain [0, {}]",
                self.length
            )));
        }
        Ok((2.0 / self.length).sqrt() * (k as f64 * std::f64::consts::PI * x / self.length).sin())
    }

    /// Discrete inner product ⟨values, φ_k⟩ = Σ_i values_i·φ_k(x_i)·Δx.
    pub fn project(&self, values: &[f64], grid: &Grid, k: usize) -> Result<f64> {
        self.project_with(values, grid, k, Quadrature::Rectangle)
    }

    /// Projection with an explicit quadrature rule (trapezoid is the oracle).
    pub fn project_with(
        &self,
        values: &[f64],
        grid: &Grid,
        k: usize,
        rule: Quadrature,
    ) -> Result<f64> {
        self.check_mode(k)?;
        self.check_grid(grid)?;
        if values.len() != grid.points().len() {
            return Err(Error::Domain(format!(
                "field has {} samples but the grid has {} points",
                values.len(),
                grid.points().len()
            )));
        }
        let samples: Vec<f64> = grid
            .points()
            .iter()
            .zip(values)
            .map(|(&x, &v)| v * self.eval_unchecked(k, x))
            .collect();
        grid.integrate(&samples, rule)
    }

    /// Pointwise sum Σ_k coeffs_k·φ_k(x_i) on the grid.
    pub fn synthesize(&self, coeffs: &[f64], grid: &Grid) -> Result<Vec<f64>> {
        self.check_grid(grid)?;
        if coeffs.len() > self.modes {
            return Err(Error::Domain(format!(
                "{} coefficients exceed the basis mode count {}",
                coeffs.len(),
                self.modes
            )));
        }
        Ok(grid
            .points()
            .iter()
            .map(|&x| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c * self.eval_unchecked(i + 1, x))
                    .sum()
            })
            .collect())
    }

    /// Coefficient vector (f_1, …, f_K) of a sampled field.
    pub fn project_all(&self, values: &[f64], grid: &Grid) -> Result<Vec<f64>> {
        (1..=self.modes).map(|k| self.project(values, grid, k)).collect()
    }

    fn eval_unchecked(&self, k: usize, x: f64) -> f64 {
        (2.0 / self.length).sqrt() * (k as f64 * std::f64::consts::PI * x / self.length).sin()
    }

    fn check_mode(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.modes {
            return Err(Error::Domain(format!(
                "mode k = {k} outside 1..={}",
                self.modes
            )));
        }
        Ok(())
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid.a() != 0.0 || (grid.b() - self.length).abs() > 1e-12 * self.length {
            return Err(Error::Domain(format!(
                "grid [{}, {}] does not span the basis domain [0, {}]",
                grid.a(),
                grid.b(),
                self.length
            )));
        }
        Ok(())
    }
}
