use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::TransformError;

/// Uniform periodic grid in a logarithmic variable `x = ln t` (or `x = ln lambda`).
///
/// Samples sit at `x_min + j * dx` for `j < n_points` with
/// `dx = (x_max - x_min) / n_points`; `x_max` itself is the periodic image
/// of `x_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LogGridRaw")]
pub struct LogGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LogGridRaw {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl TryFrom<LogGridRaw> for LogGrid {
    type Error = TransformError;
    fn try_from(raw: LogGridRaw) -> Result<Self, Self::Error> {
        LogGrid::new(raw.x_min, raw.x_max, raw.n_points)
    }
}

impl Default for LogGrid {
    fn default() -> Self {
        Self { x_min: -12.0, x_max: 12.0, n_points: 2048 }
    }
}

impl LogGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self, TransformError> {
        if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(TransformError::InvalidGrid(format!("need x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n_points < 64 || !n_points.is_power_of_two() {
            return Err(TransformError::InvalidGrid(format!(
                "n_points must be a power of two >= 64, got {n_points}"
            )));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    /// Symmetric grid `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, n_points: usize) -> Result<Self, TransformError> {
        Self::new(-half_width, half_width, n_points)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn n_points(&self) -> usize {
        self.n_points
    }
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_points as f64
    }
    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }
    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }
    /// Physical coordinates `e^x`.
    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j).exp()).collect()
    }
    /// Frequency `xi_k` of the dual grid, formed from the integer offset so
    /// that bins near `xi = 0` carry no cancellation error.
    pub fn frequency(&self, k: usize) -> f64 {
        (k as f64 - (self.n_points / 2) as f64) * self.dual().step
    }
    /// Dual frequency grid of the unitary Fourier transform.
    pub fn dual(&self) -> LinearGrid {
        let dxi = 2.0 * std::f64::consts::PI / (self.n_points as f64 * self.dx());
        LinearGrid { start: -(self.n_points as f64 / 2.0) * dxi, step: dxi, n_points: self.n_points }
    }
}

/// Uniform grid `start + j * step`, used for frequencies and for two-sided
/// sigma-functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearGrid {
    pub start: f64,
    pub step: f64,
    pub n_points: usize,
}

impl LinearGrid {
    pub fn x(&self, j: usize) -> f64 {
        self.start + j as f64 * self.step
    }
    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }
}

/// Grid carried by a [`GridFunction`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Grid {
    /// Samples at `e^x` for `x` on a [`LogGrid`].
    Log(LogGrid),
    /// Samples at `x` itself.
    Linear(LinearGrid),
}

impl Grid {
    pub fn n_points(&self) -> usize {
        match self {
            Grid::Log(g) => g.n_points(),
            Grid::Linear(g) => g.n_points,
        }
    }

    /// Grid variable (`ln t` for log grids).
    pub fn coordinates(&self) -> Vec<f64> {
        match self {
            Grid::Log(g) => g.xs(),
            Grid::Linear(g) => g.xs(),
        }
    }

    /// Physical abscissae.
    pub fn points(&self) -> Vec<f64> {
        match self {
            Grid::Log(g) => g.points(),
            Grid::Linear(g) => g.xs(),
        }
    }

    /// Quadrature weights for integrals in the physical variable
    /// (trapezoid rule in the grid variable).
    pub fn weights(&self) -> Vec<f64> {
        match self {
            Grid::Log(g) => g.points().into_iter().map(|p| p * g.dx()).collect(),
            Grid::Linear(g) => vec![g.step; g.n_points],
        }
    }
}

/// Complex samples on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self, TransformError> {
        if values.len() != grid.n_points() {
            return Err(TransformError::LengthMismatch { expected: grid.n_points(), got: values.len() });
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(TransformError::NonFinite);
        }
        Ok(Self { grid, values })
    }

    /// Samples a real function at the physical points of a log grid.
    pub fn sample_log(grid: LogGrid, f: impl Fn(f64) -> f64) -> Result<Self, TransformError> {
        let values = grid.points().into_iter().map(|t| Complex64::new(f(t), 0.0)).collect();
        Self::new(Grid::Log(grid), values)
    }

    pub fn sample_linear(grid: LinearGrid, f: impl Fn(f64) -> f64) -> Result<Self, TransformError> {
        let values = grid.xs().into_iter().map(|t| Complex64::new(f(t), 0.0)).collect();
        Self::new(Grid::Linear(grid), values)
    }

    pub fn log_grid(&self) -> Option<LogGrid> {
        match self.grid {
            Grid::Log(g) => Some(g),
            Grid::Linear(_) => None,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        self.grid.points()
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// Linear combination `a * self + b * other` on the same grid.
    pub fn axpby(&self, a: f64, other: &Self, b: f64) -> Result<Self, TransformError> {
        if self.grid != other.grid {
            return Err(TransformError::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(Self { grid: self.grid, values })
    }

    /// `L^2` norm in the physical variable.
    pub fn l2_norm(&self) -> f64 {
        self.grid
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `int f(t) conj(g(t)) dt` by the trapezoid rule in the grid variable.
    pub fn inner(&self, other: &Self) -> Result<Complex64, TransformError> {
        if self.grid != other.grid {
            return Err(TransformError::GridMismatch);
        }
        Ok(self
            .grid
            .weights()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(w, (a, b))| *w * a * b.conj())
            .sum())
    }

    /// Linear interpolation of the real part at physical point `p`;
    /// `None` outside the grid.
    pub fn interpolate_re(&self, p: f64) -> Option<f64> {
        let (coord, start, step) = match self.grid {
            Grid::Log(g) => {
                if p <= 0.0 {
                    return None;
                }
                (p.ln(), g.x_min(), g.dx())
            }
            Grid::Linear(g) => (p, g.start, g.step),
        };
        let s = (coord - start) / step;
        let n = self.values.len();
        if s < 0.0 || s > (n - 1) as f64 {
            return None;
        }
        let j = (s.floor() as usize).min(n - 2);
        let frac = s - j as f64;
        Some((1.0 - frac) * self.values[j].re + frac * self.values[j + 1].re)
    }
}
