//! Geometric discretization of the particle-mass axis.
//!
//! Cell `i` spans `[edges[i], edges[i + 1]]` and carries the cell-averaged
//! number density. The pivot of a cell is the geometric mean of its edges.

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::quadrature;

/// Serialized form of a [`MassGrid`]; only the three defining numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct MassGrid {
    x_min: f64,
    x_max: f64,
    ratio: f64,
    edges: Vec<f64>,
    pivots: Vec<f64>,
    widths: Vec<f64>,
}

impl MassGrid {
    /// Builds `n_cells` cells with constant edge ratio `(x_max / x_min)^(1 / n_cells)`.
    pub fn geometric(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_min > 0.0) {
            return Err(config(format!("grid x_min must be positive and finite, got {x_min}")));
        }
        if !(x_max.is_finite() && x_max > x_min) {
            return Err(config(format!("grid x_max must exceed x_min, got x_max = {x_max}, x_min = {x_min}")));
        }
        if n_cells == 0 {
            return Err(config("grid n_cells must be at least 1"));
        }
        let log_span = (x_max / x_min).ln();
        let ratio = (log_span / n_cells as f64).exp();
        let mut edges = Vec::with_capacity(n_cells + 1);
        edges.push(x_min);
        for i in 1..n_cells {
            edges.push(x_min * (log_span * i as f64 / n_cells as f64).exp());
        }
        edges.push(x_max);
        if edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(config("grid too fine to resolve distinct edges in double precision"));
        }
        let pivots = edges.windows(2).map(|w| (w[0] * w[1]).sqrt()).collect();
        let widths = edges.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Self { x_min, x_max, ratio, edges, pivots, widths })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_cells(&self) -> usize {
        self.pivots.len()
    }

    /// Constant ratio between consecutive edges.
    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn pivots(&self) -> &[f64] {
        &self.pivots
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    /// Index of the cell whose closed-open interval contains `x`; the upper
    /// edge `x_max` belongs to the last cell.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if !(x >= self.x_min && x <= self.x_max) {
            return None;
        }
        let idx = self.edges.partition_point(|&e| e <= x);
        Some(idx.saturating_sub(1).min(self.n_cells() - 1))
    }

    /// True when `[lo, hi]` lies inside `[x_min, x_max]`.
    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        self.x_min <= lo && hi <= self.x_max
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec { x_min: self.x_min, x_max: self.x_max, n_cells: self.n_cells() }
    }
}

impl TryFrom<GridSpec> for MassGrid {
    type Error = Error;

    fn try_from(spec: GridSpec) -> Result<Self> {
        MassGrid::geometric(spec.x_min, spec.x_max, spec.n_cells)
    }
}

impl From<MassGrid> for GridSpec {
    fn from(grid: MassGrid) -> Self {
        grid.spec()
    }
}

/// Cell averages of `g0` computed with a fixed 16-point Gauss-Legendre rule
/// on every cell.
pub fn project_initial_condition<F>(grid: &MassGrid, g0: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64,
{
    let rule = quadrature::gauss_legendre_16();
    let mut out = Vec::with_capacity(grid.n_cells());
    for (i, w) in grid.edges.windows(2).enumerate() {
        let mut bad = None;
        let integral = rule.integrate(w[0], w[1], |x| {
            let v = g0(x);
            if !(v.is_finite() && v >= 0.0) && bad.is_none() {
                bad = Some((x, v));
            }
            v
        });
        if let Some((x, v)) = bad {
            return Err(Error::Input(format!(
                "initial condition must be finite and nonnegative; g0({x:e}) = {v} in cell {i}"
            )));
        }
        out.push(integral / grid.widths[i]);
    }
    Ok(out)
}
