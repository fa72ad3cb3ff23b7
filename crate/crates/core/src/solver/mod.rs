//! Time integration of the truncated coagulation / collision-induced
//! fragmentation system on a [`MassGrid`].

mod operator;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::error::{config, Error, Result};
use crate::grid::{project_initial_condition, MassGrid};
use crate::kernels::{BreakupKernel, TruncatedKernelPair};
use crate::moments::moment_of;
use operator::Operator;

/// Step sizes below this fraction of `t_end` abort the run.
pub const DT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    /// Cell-averaged number density.
    pub density: Vec<f64>,
    pub step_count: usize,
    /// Mass carried off the grid by coagulation beyond `x_max`.
    pub overflow_mass: f64,
    /// Mass removed by clipping negative densities.
    pub clipped_mass: f64,
}

impl State {
    pub fn new(density: Vec<f64>) -> Self {
        Self { t: 0.0, density, step_count: 0, overflow_mass: 0.0, clipped_mass: 0.0 }
    }

    pub fn zeros(n_cells: usize) -> Self {
        Self::new(vec![0.0; n_cells])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositivityMode {
    /// Set negative densities to zero and record the removed mass.
    ClipAndReport,
    /// Halve the step until no density goes negative.
    RejectStep,
}

/// Moments recorded at each sample: `M_{-omega}`, `M_0`, `M_1`, `M_2`, then `extra`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentPlan {
    pub omega: f64,
    #[serde(default)]
    pub extra: Vec<f64>,
}

impl Default for MomentPlan {
    fn default() -> Self {
        Self { omega: 0.5, extra: Vec::new() }
    }
}

impl MomentPlan {
    pub fn orders(&self) -> Vec<f64> {
        let mut v = vec![-self.omega, 0.0, 1.0, 2.0];
        v.extend(&self.extra);
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid: MassGrid,
    pub kernels: TruncatedKernelPair,
    pub breakup: BreakupKernel,
    pub t_end: f64,
    pub dt_init: f64,
    /// Growth factor damping for the step controller, in `(0, 1]`.
    pub dt_safety: f64,
    pub rtol: f64,
    /// Absolute tolerance per cell as a fraction of the current total mass.
    pub atol: f64,
    pub positivity: PositivityMode,
    pub max_steps: usize,
    /// Number of uniformly spaced samples on `[0, t_end]`, endpoints included.
    pub sample_count: usize,
    pub moments: MomentPlan,
}

impl SolverConfig {
    pub fn new(grid: MassGrid, kernels: TruncatedKernelPair, breakup: BreakupKernel, t_end: f64) -> Self {
        Self {
            grid,
            kernels,
            breakup,
            t_end,
            dt_init: 1e-3 * t_end,
            dt_safety: 0.9,
            rtol: 1e-6,
            atol: 1e-9,
            positivity: PositivityMode::RejectStep,
            max_steps: 1_000_000,
            sample_count: 11,
            moments: MomentPlan::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.dt_init.is_finite() && self.dt_init > 0.0) {
            return Err(config(format!("dt_init must be positive, got {}", self.dt_init)));
        }
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return Err(config(format!("dt_safety must lie in (0, 1], got {}", self.dt_safety)));
        }
        if !(self.rtol > 0.0 && self.atol >= 0.0) {
            return Err(config("rtol must be positive and atol nonnegative"));
        }
        if self.sample_count < 2 {
            return Err(config("sample_count must be at least 2"));
        }
        if self.max_steps == 0 {
            return Err(config("max_steps must be positive"));
        }
        if self.kernels.n == 0 {
            return Err(config("truncation index n must be at least 1"));
        }
        self.kernels.coagulation.validate()?;
        self.kernels.collision.validate()?;
        self.breakup.validate()
    }

    pub fn sample_times(&self) -> Vec<f64> {
        let m = self.sample_count - 1;
        (0..=m).map(|k| if k == m { self.t_end } else { self.t_end * k as f64 / m as f64 }).collect()
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("solver config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Derivative {
    pub density: Vec<f64>,
    pub overflow_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: State,
    pub dt_used: f64,
    pub dt_next: f64,
    pub rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub state: State,
    pub moments: Vec<f64>,
    /// `(M_1(t) - M_1(0)) / M_1(0)`, or the absolute change when `M_1(0) = 0`.
    pub mass_drift: f64,
    /// Last accepted step size before this sample (0 at `t = 0`).
    pub dt: f64,
}

impl Sample {
    pub fn t(&self) -> f64 {
        self.state.t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub config_hash: String,
    pub grid: MassGrid,
    pub moment_orders: Vec<f64>,
    pub samples: Vec<Sample>,
    pub dt_history: Vec<f64>,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(Sample::t).collect()
    }

    /// Moment series of order `xi`, if it was recorded.
    pub fn moment_series(&self, xi: f64) -> Option<Vec<f64>> {
        let idx = self.moment_orders.iter().position(|&o| o == xi)?;
        Some(self.samples.iter().map(|s| s.moments[idx]).collect())
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has the t = 0 sample")
    }
}

/// A run that stopped early; `partial` holds every sample recorded so far.
#[derive(Debug, Clone, Error)]
#[error("run aborted: {error}")]
pub struct AbortedRun {
    pub partial: Trajectory,
    pub error: Error,
}

pub struct Solver {
    config: SolverConfig,
    op: Operator,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let op = Operator::new(&config)?;
        Ok(Self { config, op })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn grid(&self) -> &MassGrid {
        &self.config.grid
    }

    pub fn rhs(&self, state: &State) -> Result<Derivative> {
        self.rhs_density(&state.density)
    }

    fn rhs_density(&self, density: &[f64]) -> Result<Derivative> {
        let widths = self.op.widths();
        if density.len() != widths.len() {
            return Err(config(format!("state has {} cells, grid has {}", density.len(), widths.len())));
        }
        let numbers: Vec<f64> = density.iter().zip(widths).map(|(g, w)| g * w).collect();
        let rates = self.op.number_rates(&numbers)?;
        let density = rates.dn.iter().zip(widths).map(|(d, w)| d / w).collect();
        Ok(Derivative { density, overflow_rate: rates.overflow_rate })
    }

    /// One accepted two-stage SSP step starting from `dt`, halving on
    /// rejection. The Euler predictor serves as the embedded first-order
    /// solution for the error estimate.
    pub fn step(&self, state: &State, dt: f64) -> Result<StepOutcome> {
        if !(dt > 0.0) {
            return Err(config(format!("step size must be positive, got {dt}")));
        }
        let cfg = &self.config;
        let floor = DT_FLOOR * cfg.t_end;
        let pivots = self.op.pivots();
        let widths = self.op.widths();
        let mass_weights: Vec<f64> = pivots.iter().zip(widths).map(|(p, w)| p * w).collect();
        let mass_ref = moment_of(&state.density, &cfg.grid, 1.0).abs();

        let f0 = self.rhs(state)?;
        let mut dt = dt;
        let mut rejected = 0;
        loop {
            if dt < floor {
                return Err(Error::Stiffness { t: state.t, dt });
            }
            let predictor: Vec<f64> = state.density.iter().zip(&f0.density).map(|(g, f)| g + dt * f).collect();
            let f1 = self.rhs_density(&predictor)?;
            let mut next: Vec<f64> = state
                .density
                .iter()
                .zip(&predictor)
                .zip(&f1.density)
                .map(|((g, g1), f)| 0.5 * g + 0.5 * (g1 + dt * f))
                .collect();
            let overflow = state.overflow_mass + 0.5 * dt * (f0.overflow_rate + f1.overflow_rate);

            let mut err: f64 = 0.0;
            for i in 0..next.len() {
                let scale = cfg.atol * mass_ref + cfg.rtol * mass_weights[i] * state.density[i].abs().max(next[i].abs());
                let diff = mass_weights[i] * (next[i] - predictor[i]).abs();
                let e = if diff == 0.0 { 0.0 } else if scale > 0.0 { diff / scale } else { f64::INFINITY };
                err = err.max(e);
            }
            if !err.is_finite() && next.iter().any(|v| !v.is_finite()) {
                let cell = next.iter().position(|v| !v.is_finite()).unwrap_or(0);
                return Err(Error::NonFinite { cell, context: "step update".into() });
            }
            if err > 1.0 {
                dt *= 0.5;
                rejected += 1;
                continue;
            }
            let mut clipped = 0.0;
            if next.iter().any(|&v| v < 0.0) {
                match cfg.positivity {
                    PositivityMode::RejectStep => {
                        dt *= 0.5;
                        rejected += 1;
                        continue;
                    }
                    PositivityMode::ClipAndReport => clipped = clip_negative(&mut next, &mass_weights),
                }
            }
            let growth = if err == 0.0 { 5.0 } else { (cfg.dt_safety / err.sqrt()).clamp(0.2, 5.0) };
            let state = State {
                t: state.t + dt,
                density: next,
                step_count: state.step_count + 1,
                overflow_mass: overflow,
                clipped_mass: state.clipped_mass + clipped,
            };
            return Ok(StepOutcome { state, dt_used: dt, dt_next: dt * growth, rejected });
        }
    }

    /// Integrates from the projection of `g0` and samples at the configured times.
    pub fn run<F: Fn(f64) -> f64>(&self, g0: F) -> std::result::Result<Trajectory, AbortedRun> {
        match project_initial_condition(&self.config.grid, g0) {
            Ok(density) => self.run_from(State::new(density)),
            Err(error) => Err(AbortedRun { partial: self.empty_trajectory(), error }),
        }
    }

    pub fn run_from(&self, initial: State) -> std::result::Result<Trajectory, AbortedRun> {
        let cfg = &self.config;
        let mut traj = self.empty_trajectory();
        let m1_init = moment_of(&initial.density, &cfg.grid, 1.0);
        let orders = traj.moment_orders.clone();
        let record = |traj: &mut Trajectory, state: &State, dt: f64| {
            let moments: Vec<f64> = orders.iter().map(|&xi| moment_of(&state.density, &cfg.grid, xi)).collect();
            let change = moments[2] - m1_init;
            let mass_drift = if m1_init != 0.0 { change / m1_init } else { change };
            traj.samples.push(Sample { state: state.clone(), moments, mass_drift, dt });
        };

        if let Some(cell) = initial.density.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(AbortedRun {
                partial: traj,
                error: Error::Input(format!("initial density in cell {cell} is negative or not finite")),
            });
        }
        let mut state = initial;
        record(&mut traj, &state, 0.0);
        let mut dt = cfg.dt_init;
        let mut last_dt = 0.0;
        for &target in &cfg.sample_times()[1..] {
            while state.t < target {
                if state.step_count >= cfg.max_steps {
                    return Err(AbortedRun { partial: traj, error: Error::StepLimit(cfg.max_steps) });
                }
                let remaining = target - state.t;
                let capped = dt >= remaining;
                let attempt = if capped { remaining } else { dt };
                let outcome = match self.step(&state, attempt) {
                    Ok(o) => o,
                    Err(error) => return Err(AbortedRun { partial: traj, error }),
                };
                traj.rejected_steps += outcome.rejected;
                traj.dt_history.push(outcome.dt_used);
                last_dt = outcome.dt_used;
                let reached = outcome.dt_used == remaining;
                state = outcome.state;
                if reached {
                    state.t = target;
                    // Keep the controller's pre-cap step when the cap was the only limit.
                    dt = if capped && outcome.rejected == 0 { dt.max(outcome.dt_next) } else { outcome.dt_next };
                } else {
                    dt = outcome.dt_next;
                }
            }
            record(&mut traj, &state, last_dt);
        }
        Ok(traj)
    }

    fn empty_trajectory(&self) -> Trajectory {
        Trajectory {
            config_hash: self.config.fingerprint(),
            grid: self.config.grid.clone(),
            moment_orders: self.config.moments.orders(),
            samples: Vec::new(),
            dt_history: Vec::new(),
            rejected_steps: 0,
        }
    }
}

/// Zeroes negative entries and returns the mass removed, `Σ p_i w_i |g_i|`.
pub fn clip_negative(density: &mut [f64], mass_weights: &[f64]) -> f64 {
    let mut removed = 0.0;
    for (g, m) in density.iter_mut().zip(mass_weights) {
        if *g < 0.0 {
            removed += m * -*g;
            *g = 0.0;
        }
    }
    removed
}

pub fn rhs(state: &State, config: &SolverConfig) -> Result<Derivative> {
    Solver::new(config.clone())?.rhs(state)
}

pub fn step(state: &State, config: &SolverConfig, dt: f64) -> Result<StepOutcome> {
    Solver::new(config.clone())?.step(state, dt)
}

pub fn run<F: Fn(f64) -> f64>(config: &SolverConfig, g0: F) -> std::result::Result<Trajectory, AbortedRun> {
    match Solver::new(config.clone()) {
        Ok(solver) => solver.run(g0),
        Err(error) => Err(AbortedRun {
            partial: Trajectory {
                config_hash: config.fingerprint(),
                grid: config.grid.clone(),
                moment_orders: config.moments.orders(),
                samples: Vec::new(),
                dt_history: Vec::new(),
                rejected_steps: 0,
            },
            error,
        }),
    }
}
