//! Precomputed sectional operator for the truncated equation.
//!
//! Coagulation births use the fixed-pivot split: a merged particle of mass
//! `v` with `p_i <= v < p_{i+1}` is shared between the two pivots so that both
//! number and mass are preserved. Fragment births use the same hat-function
//! split applied to the daughter distribution, evaluated exactly per cell.

use rayon::prelude::*;

use super::SolverConfig;
use crate::error::{Error, Result};

/// One contribution `coeff * K[j][k] * N_j * N_k` to a destination cell.
#[derive(Debug, Clone, Copy)]
struct Birth {
    j: usize,
    k: usize,
    coeff: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Operator {
    n: usize,
    pivots: Vec<f64>,
    widths: Vec<f64>,
    k: Vec<f64>,
    c: Vec<f64>,
    births: Vec<Vec<Birth>>,
    /// Pairs whose merged mass leaves the grid; `coeff` already carries `v`.
    overflow: Vec<Birth>,
    /// Per destination `i`: `(parent j, b_{i <- j})`.
    fragments: Vec<Vec<(usize, f64)>>,
}

/// Rates in number space plus the overflow mass rate.
pub(crate) struct NumberRates {
    pub dn: Vec<f64>,
    pub overflow_rate: f64,
}

impl Operator {
    pub fn new(config: &SolverConfig) -> Result<Self> {
        let grid = &config.grid;
        let n = grid.n_cells();
        let pivots = grid.pivots().to_vec();
        let widths = grid.widths().to_vec();
        let x_max = grid.x_max();

        let mut k = vec![0.0; n * n];
        let mut c = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                k[i * n + j] = config.kernels.k_value(pivots[i], pivots[j]);
                c[i * n + j] = config.kernels.c_value(pivots[i], pivots[j]);
            }
        }

        let mut births: Vec<Vec<Birth>> = vec![Vec::new(); n];
        let mut overflow = Vec::new();
        let last = n - 1;
        for j in 0..n {
            for kk in j..n {
                if k[j * n + kk] == 0.0 {
                    continue;
                }
                let half = if j == kk { 0.5 } else { 1.0 };
                let v = pivots[j] + pivots[kk];
                if v > x_max {
                    overflow.push(Birth { j, k: kk, coeff: half * v });
                } else if v >= pivots[last] {
                    // Above the last pivot: keep the mass inside the last cell.
                    births[last].push(Birth { j, k: kk, coeff: half * v / pivots[last] });
                } else {
                    let i = pivots.partition_point(|&p| p <= v) - 1;
                    let share = (pivots[i + 1] - v) / (pivots[i + 1] - pivots[i]);
                    if share > 0.0 {
                        births[i].push(Birth { j, k: kk, coeff: half * share });
                    }
                    if share < 1.0 {
                        births[i + 1].push(Birth { j, k: kk, coeff: half * (1.0 - share) });
                    }
                }
            }
        }

        let has_fragmentation = c.iter().any(|&v| v != 0.0);
        let mut fragments: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        if has_fragmentation {
            for j in 0..n {
                for (i, b) in fragment_weights(config, &pivots, j)?.into_iter().enumerate() {
                    if b != 0.0 {
                        fragments[i].push((j, b));
                    }
                }
            }
        }

        Ok(Self { n, pivots, widths, k, c, births, overflow, fragments })
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn pivots(&self) -> &[f64] {
        &self.pivots
    }

    /// Number of fragments per cell produced by one breakup of a pivot-`j` parent.
    #[cfg(test)]
    pub fn fragment_column(&self, j: usize) -> Vec<f64> {
        let mut col = vec![0.0; self.n];
        for (i, list) in self.fragments.iter().enumerate() {
            for &(parent, b) in list {
                if parent == j {
                    col[i] = b;
                }
            }
        }
        col
    }

    /// Time derivative of the cell numbers `N_i = g_i w_i`.
    pub fn number_rates(&self, numbers: &[f64]) -> Result<NumberRates> {
        let n = self.n;
        // Per-cell loss rates: coagulation and collision partners.
        let losses: Vec<(f64, f64)> = (0..n)
            .into_par_iter()
            .with_min_len(8)
            .map(|i| {
                let krow = &self.k[i * n..(i + 1) * n];
                let crow = &self.c[i * n..(i + 1) * n];
                let mut coag = 0.0;
                let mut coll = 0.0;
                for j in 0..n {
                    coag += krow[j] * numbers[j];
                    coll += crow[j] * numbers[j];
                }
                (coag, coll)
            })
            .collect();
        let breakups: Vec<f64> = numbers.iter().zip(&losses).map(|(&nj, &(_, coll))| nj * coll).collect();

        let dn: Vec<f64> = (0..n)
            .into_par_iter()
            .with_min_len(8)
            .map(|i| {
                let mut gain = 0.0;
                for b in &self.births[i] {
                    gain += b.coeff * self.k[b.j * n + b.k] * numbers[b.j] * numbers[b.k];
                }
                for &(j, w) in &self.fragments[i] {
                    gain += w * breakups[j];
                }
                let (coag, coll) = losses[i];
                gain - numbers[i] * coag - numbers[i] * coll
            })
            .collect();

        if let Some(cell) = dn.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { cell, context: "right-hand side".into() });
        }
        let mut overflow_rate = 0.0;
        for b in &self.overflow {
            overflow_rate += b.coeff * self.k[b.j * n + b.k] * numbers[b.j] * numbers[b.k];
        }
        Ok(NumberRates { dn, overflow_rate })
    }
}

/// Fragments per cell from one breakup of a parent sitting at pivot `j`.
///
/// Fragments between two pivots are split linearly between them; fragments
/// below the first pivot are assigned to cell 0 with their mass preserved.
fn fragment_weights(config: &SolverConfig, pivots: &[f64], j: usize) -> Result<Vec<f64>> {
    let b = &config.breakup;
    let y = pivots[j];
    let mut w = vec![0.0; pivots.len()];
    let (_, m_low) = b.partial_moments(y, 0.0, pivots[0])?;
    w[0] = m_low / pivots[0];
    for i in 1..=j {
        let (lo, hi) = (pivots[i - 1], pivots[i]);
        let (n0, n1) = b.partial_moments(y, lo, hi)?;
        let span = hi - lo;
        w[i] += (n1 - lo * n0) / span;
        w[i - 1] += (hi * n0 - n1) / span;
    }
    Ok(w)
}
