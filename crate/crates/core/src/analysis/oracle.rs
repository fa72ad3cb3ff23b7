//! Brute-force reference integration of the discrete system.
//!
//! Shares no code with the solver's operator: births are located by linear
//! search, fragment weights come from quadrature of the breakup density, and
//! time stepping is fixed-step explicit Euler.

use crate::error::{Error, Result};
use crate::kernels::BreakupFamily;
use crate::moments::moment_of;
use crate::quadrature::tanh_sinh;
use crate::solver::{Sample, SolverConfig, State, Trajectory};

pub const ORACLE_MAX_CELLS: usize = 6;
/// Euler steps over `[0, t_end]`.
pub const ORACLE_STEPS: usize = 1_000_000;

struct Dense {
    n: usize,
    k: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    /// `birth[j][k][i]`: share of a `(j, k)` merger landing in cell `i`.
    birth: Vec<Vec<Vec<f64>>>,
    /// Mass leaving the grid per `(j, k)` merger.
    lost: Vec<Vec<f64>>,
    /// `frag[j][i]`: fragments in cell `i` per breakup of a pivot-`j` particle.
    frag: Vec<Vec<f64>>,
}

fn build(config: &SolverConfig) -> Result<Dense> {
    let grid = &config.grid;
    let n = grid.n_cells();
    let p = grid.pivots();
    let mut k = vec![vec![0.0; n]; n];
    let mut c = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in 0..n {
            k[a][b] = config.kernels.eval_k(p[a], p[b])?;
            c[a][b] = config.kernels.eval_c(p[a], p[b])?;
        }
    }

    let mut birth = vec![vec![vec![0.0; n]; n]; n];
    let mut lost = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in 0..n {
            let v = p[a] + p[b];
            if v > grid.x_max() {
                lost[a][b] = v;
                continue;
            }
            if v >= p[n - 1] {
                birth[a][b][n - 1] = v / p[n - 1];
                continue;
            }
            let mut i = 0;
            while !(p[i] <= v && v < p[i + 1]) {
                i += 1;
            }
            let lo_share = (p[i + 1] - v) / (p[i + 1] - p[i]);
            birth[a][b][i] += lo_share;
            birth[a][b][i + 1] += 1.0 - lo_share;
        }
    }

    let mut frag = vec![vec![0.0; n]; n];
    for j in 0..n {
        let y = p[j];
        let dens = |x: f64| config.breakup.eval(x, y, 1.0).unwrap_or(0.0);
        let kinks: Vec<f64> = match &config.breakup.family {
            BreakupFamily::Custom { profile } => profile.ratios().iter().map(|r| r * y).collect(),
            BreakupFamily::PowerLaw { .. } => Vec::new(),
        };
        frag[j][0] += piecewise(|x| x * dens(x), 0.0, p[0], &kinks)? / p[0];
        for i in 1..=j {
            let (lo, hi) = (p[i - 1], p[i]);
            let span = hi - lo;
            frag[j][i] += piecewise(|x| (x - lo) / span * dens(x), lo, hi, &kinks)?;
            frag[j][i - 1] += piecewise(|x| (hi - x) / span * dens(x), lo, hi, &kinks)?;
        }
    }
    Ok(Dense { n, k, c, birth, lost, frag })
}

/// Tanh-sinh over `[a, b]`, split at any kinks of the integrand inside it.
fn piecewise<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, kinks: &[f64]) -> Result<f64> {
    let mut cuts = vec![a];
    cuts.extend(kinks.iter().copied().filter(|&k| k > a && k < b));
    cuts.push(b);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += tanh_sinh(&f, w[0], w[1], 1e-13)?;
    }
    Ok(total)
}

impl Dense {
    /// Number-space derivative and overflow mass rate.
    fn derivative(&self, num: &[f64], out: &mut [f64]) -> f64 {
        let n = self.n;
        for o in out.iter_mut() {
            *o = 0.0;
        }
        let mut overflow = 0.0;
        for a in 0..n {
            for b in 0..n {
                let rate = 0.5 * self.k[a][b] * num[a] * num[b];
                for i in 0..n {
                    out[i] += rate * self.birth[a][b][i];
                }
                overflow += rate * self.lost[a][b];
                out[a] -= self.k[a][b] * num[a] * num[b];
                let breakups = self.c[a][b] * num[a] * num[b];
                out[a] -= breakups;
                for i in 0..n {
                    out[i] += breakups * self.frag[a][i];
                }
            }
        }
        overflow
    }
}

/// Integrates the same discrete system with explicit Euler at
/// `dt = t_end / ORACLE_STEPS`, recording the configured sample times.
pub fn oracle_dense_ode(config: &SolverConfig, initial: &[f64]) -> Result<Trajectory> {
    let grid = &config.grid;
    let n = grid.n_cells();
    if n > ORACLE_MAX_CELLS {
        return Err(Error::Config(format!("oracle supports at most {ORACLE_MAX_CELLS} cells, got {n}")));
    }
    if initial.len() != n {
        return Err(Error::Config(format!("initial state has {} cells, grid has {n}", initial.len())));
    }
    config.validate()?;
    let dense = build(config)?;
    let w = grid.widths();
    let mut num: Vec<f64> = initial.iter().zip(w).map(|(g, w)| g * w).collect();
    let mut rate = vec![0.0; n];
    let mut overflow = 0.0;
    let dt = config.t_end / ORACLE_STEPS as f64;

    let orders = config.moments.orders();
    let m1_init = moment_of(initial, grid, 1.0);
    let times = config.sample_times();
    let mut samples = Vec::with_capacity(times.len());
    let mut next = 0;
    for step in 0..=ORACLE_STEPS {
        let t = step as f64 * dt;
        while next < times.len() && times[next] <= t + 0.5 * dt {
            let density: Vec<f64> = num.iter().zip(w).map(|(m, w)| m / w).collect();
            let moments: Vec<f64> = orders.iter().map(|&xi| moment_of(&density, grid, xi)).collect();
            let change = moments[2] - m1_init;
            let mass_drift = if m1_init != 0.0 { change / m1_init } else { change };
            let state = State { t: times[next], density, step_count: step, overflow_mass: overflow, clipped_mass: 0.0 };
            samples.push(Sample { state, moments, mass_drift, dt: if step == 0 { 0.0 } else { dt } });
            next += 1;
        }
        if step == ORACLE_STEPS {
            break;
        }
        let lost = dense.derivative(&num, &mut rate);
        for i in 0..n {
            num[i] += dt * rate[i];
        }
        overflow += dt * lost;
    }

    Ok(Trajectory {
        config_hash: config.fingerprint(),
        grid: grid.clone(),
        moment_orders: orders,
        samples,
        dt_history: Vec::new(),
        rejected_steps: 0,
    })
}
