//! Post-run verification: mass conservation, the weighted uniqueness
//! distance with its Gronwall contraction check, truncation studies, and
//! independent oracles.

mod oracle;

pub use oracle::{oracle_dense_ode, ORACLE_MAX_CELLS, ORACLE_STEPS};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::grid::MassGrid;
use crate::kernels::truncate;
use crate::moments::{moment_of, EnvelopeParams};
use crate::solver::{Solver, SolverConfig, State, Trajectory};

/// Weight exponents for the uniqueness distance and the weighted norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub theta: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

/// Which of the printed constraints on `theta` hold, and which is tighter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaConstraints {
    /// `sigma <= theta` and `sigma + theta <= sigma2`.
    pub weights_hold: bool,
    /// `sigma + theta <= sigma1`.
    pub distance_holds: bool,
    /// `"sigma2"` or `"sigma1"`: the smaller upper limit on `sigma + theta`.
    pub binding: &'static str,
    /// Largest admissible `theta` under both constraints (`None` if empty).
    pub theta_max: Option<f64>,
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.theta) {
            return Err(config(format!("theta must lie in [0, 1), got {}", self.theta)));
        }
        if !(self.sigma1 >= 1.0) {
            return Err(config(format!("sigma1 must be at least 1, got {}", self.sigma1)));
        }
        if !(self.sigma2 > 0.0 && self.sigma2 < 1.0) {
            return Err(config(format!("sigma2 must lie in (0, 1), got {}", self.sigma2)));
        }
        Ok(())
    }

    pub fn theta_constraints(&self, sigma: f64) -> ThetaConstraints {
        let limit = self.sigma1.min(self.sigma2);
        let theta_max = (limit - sigma).min(1.0 - f64::EPSILON);
        ThetaConstraints {
            weights_hold: sigma <= self.theta && sigma + self.theta <= self.sigma2,
            distance_holds: sigma + self.theta <= self.sigma1,
            binding: if self.sigma2 <= self.sigma1 { "sigma2" } else { "sigma1" },
            theta_max: (theta_max >= sigma).then_some(theta_max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassReport {
    /// Signed drift of largest magnitude, `(M_1(t) - M_1(0)) / M_1(0)`.
    pub raw_drift: f64,
    /// Same with overflow and clipped mass added back.
    pub adjusted_drift: f64,
    /// True when `M_1(0) = 0` and the drifts are absolute.
    pub absolute: bool,
    pub worst_time: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub fn mass_conservation_report(traj: &Trajectory, tolerance: f64) -> Result<MassReport> {
    let first = traj.samples.first().ok_or_else(|| config("trajectory has no samples"))?;
    let m1_init = moment_of(&first.state.density, &traj.grid, 1.0);
    let absolute = m1_init == 0.0;
    let scale = if absolute { 1.0 } else { m1_init };
    let mut raw_drift: f64 = 0.0;
    let mut adjusted_drift: f64 = 0.0;
    let mut worst_time = first.t();
    for s in &traj.samples {
        let m1 = moment_of(&s.state.density, &traj.grid, 1.0);
        let raw = (m1 - m1_init) / scale;
        let adjusted = (m1 + s.state.overflow_mass + s.state.clipped_mass - m1_init) / scale;
        if raw.abs() > raw_drift.abs() {
            raw_drift = raw;
        }
        if adjusted.abs() > adjusted_drift.abs() {
            adjusted_drift = adjusted;
            worst_time = s.t();
        }
    }
    Ok(MassReport { raw_drift, adjusted_drift, absolute, worst_time, tolerance, passed: adjusted_drift.abs() <= tolerance })
}

/// `Σ (p_i^sigma1 + p_i^-sigma2) |g_i| w_i`.
pub fn weighted_norm(state: &State, grid: &MassGrid, sigma1: f64, sigma2: f64) -> f64 {
    let mut total = 0.0;
    for ((g, p), w) in state.density.iter().zip(grid.pivots()).zip(grid.widths()) {
        total += (p.powf(sigma1) + p.powf(-sigma2)) * g.abs() * w;
    }
    total
}

/// `sup_t ‖g(t)‖_{sigma1, sigma2}` over the recorded samples.
pub fn trajectory_norm(traj: &Trajectory, sigma1: f64, sigma2: f64) -> f64 {
    traj.samples.iter().map(|s| weighted_norm(&s.state, &traj.grid, sigma1, sigma2)).fold(0.0, f64::max)
}

/// `Σ (p_i + p_i^-theta) |g_i - h_i| w_i`.
pub fn state_distance(g: &[f64], h: &[f64], grid: &MassGrid, theta: f64) -> f64 {
    let mut total = 0.0;
    for (((a, b), p), w) in g.iter().zip(h).zip(grid.pivots()).zip(grid.widths()) {
        total += (p + p.powf(-theta)) * (a - b).abs() * w;
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSeries {
    pub times: Vec<f64>,
    pub q: Vec<f64>,
}

impl DistanceSeries {
    pub fn sup(&self) -> f64 {
        self.q.iter().copied().fold(0.0, f64::max)
    }
}

/// `Q(t)` between two runs on the same grid and sample times.
pub fn uniqueness_distance(run_g: &Trajectory, run_h: &Trajectory, theta: f64) -> Result<DistanceSeries> {
    if run_g.grid != run_h.grid {
        return Err(config("uniqueness distance needs identical grids"));
    }
    if run_g.times() != run_h.times() {
        return Err(config("uniqueness distance needs identical sample times"));
    }
    let q = run_g
        .samples
        .iter()
        .zip(&run_h.samples)
        .map(|(a, b)| state_distance(&a.state.density, &b.state.density, &run_g.grid, theta))
        .collect();
    Ok(DistanceSeries { times: run_g.times(), q })
}

/// `Psi = 4[2^mu k1 ‖g‖ + 2^mu k1 ‖h‖ + 2 k2 ‖g‖ + k2 (eta(theta)+1) ‖g‖ + k2 eta(theta) ‖h‖]`.
pub fn gronwall_constant_psi(norm_g: f64, norm_h: f64, params: &EnvelopeParams, eta_theta: f64) -> f64 {
    let c = 2f64.powf(params.mu) * params.k1;
    let k2 = params.k2;
    4.0 * (c * norm_g + c * norm_h + 2.0 * k2 * norm_g + k2 * (eta_theta + 1.0) * norm_g + k2 * eta_theta * norm_h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionRow {
    pub t: f64,
    pub q: f64,
    pub bound: f64,
    /// `bound (1 + tol) - q`; negative on violation.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub psi: f64,
    pub tolerance: f64,
    pub rows: Vec<ContractionRow>,
    pub passed: bool,
    /// First sample time at which the bound fails.
    pub witness: Option<f64>,
}

/// Checks `Q(t) <= Q(0) e^{Psi t} (1 + tol)` at every sample.
pub fn contraction_check(series: &DistanceSeries, psi: f64, tolerance: f64) -> ContractionReport {
    let q0 = series.q.first().copied().unwrap_or(0.0);
    let t0 = series.times.first().copied().unwrap_or(0.0);
    let rows: Vec<ContractionRow> = series
        .times
        .iter()
        .zip(&series.q)
        .map(|(&t, &q)| {
            let bound = q0 * (psi * (t - t0)).exp();
            ContractionRow { t, q, bound, margin: bound * (1.0 + tolerance) - q }
        })
        .collect();
    let witness = rows.iter().find(|r| r.margin < 0.0).map(|r| r.t);
    ContractionReport { psi, tolerance, rows, passed: witness.is_none(), witness }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePair {
    pub n_coarse: u32,
    pub n_fine: u32,
    pub sup_q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub theta: f64,
    pub pairs: Vec<ConvergencePair>,
    /// Distances are nonincreasing along `pairs`.
    pub monotone: bool,
}

/// Runs `base` with each truncation index and reports `sup_t Q` between
/// consecutive runs.
pub fn truncation_convergence<F>(base: &SolverConfig, g0: F, n_list: &[u32], theta: f64) -> Result<ConvergenceReport>
where
    F: Fn(f64) -> f64 + Sync,
{
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(config("truncation indices must be strictly increasing"));
    }
    if let Some(&n_max) = n_list.last() {
        let n = n_max as f64;
        if !base.grid.covers(1.0 / n, n) {
            return Err(config(format!(
                "grid [{}, {}] does not cover [1/{n_max}, {n_max}]",
                base.grid.x_min(),
                base.grid.x_max()
            )));
        }
    }
    let runs: Vec<Trajectory> = n_list
        .par_iter()
        .map(|&n| {
            let mut cfg = base.clone();
            cfg.kernels = truncate(base.kernels.coagulation.clone(), base.kernels.collision.clone(), n)?;
            Solver::new(cfg)?.run(&g0).map_err(|aborted| aborted.error)
        })
        .collect::<Result<_>>()?;
    let mut pairs = Vec::new();
    for (w, runs) in n_list.windows(2).zip(runs.windows(2)) {
        let q = uniqueness_distance(&runs[0], &runs[1], theta)?;
        pairs.push(ConvergencePair { n_coarse: w[0], n_fine: w[1], sup_q: q.sup() });
    }
    let monotone = pairs.windows(2).all(|p| p[1].sup_q <= p[0].sup_q);
    Ok(ConvergenceReport { theta, pairs, monotone })
}

/// `M_0(t) = M_0(0) / (1 + k M_0(0) t / 2)` for `K = k`, `C = 0`.
pub fn oracle_constant_kernel_m0(k: f64, m0_init: f64, t: f64) -> f64 {
    m0_init / (1.0 + k * m0_init * t / 2.0)
}

#[cfg(test)]
mod tests;
