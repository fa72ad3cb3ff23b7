//! Discrete moments, Gronwall moment envelopes, and the pointwise bound on
//! truncated solutions.

use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::grid::MassGrid;
use crate::kernels::{BreakupKernel, CoagulationKernel, CollisionKernel};
use crate::solver::{State, Trajectory};

/// `M_xi = Σ p_i^xi g_i w_i`.
pub fn moment(state: &State, grid: &MassGrid, xi: f64) -> f64 {
    if xi <= -1.0 {
        log::warn!("moment of order {xi} <= -1 depends on the lower grid edge");
    }
    moment_of(&state.density, grid, xi)
}

pub fn moment_of(density: &[f64], grid: &MassGrid, xi: f64) -> f64 {
    let mut total = 0.0;
    for ((g, p), w) in density.iter().zip(grid.pivots()).zip(grid.widths()) {
        total += p.powf(xi) * g * w;
    }
    total
}

/// Constant with `(x + y)^mu <= k(mu) (x^mu + y^mu)`.
pub fn k_mu(mu: f64) -> f64 {
    2f64.powf(mu - 1.0).max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeParams {
    /// Horizon `T`.
    pub horizon: f64,
    pub k1: f64,
    pub mu: f64,
    pub sigma: f64,
    pub k2: f64,
    pub alpha: f64,
    /// `N = sup_y N(y)`.
    pub n_fragments: f64,
    /// `eta(omega)` for the negative moment order below.
    pub eta_omega: f64,
    pub omega: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub b_tilde: f64,
}

impl EnvelopeParams {
    pub fn from_kernels(
        coagulation: &CoagulationKernel,
        collision: &CollisionKernel,
        breakup: &BreakupKernel,
        omega: f64,
        horizon: f64,
        lambda: (f64, f64),
    ) -> Result<Self> {
        let params = Self {
            horizon,
            k1: coagulation.bound.k1,
            mu: coagulation.bound.mu,
            sigma: coagulation.bound.sigma,
            k2: collision.k2,
            alpha: collision.alpha,
            n_fragments: breakup.total_fragments(),
            eta_omega: breakup.eta(omega)?,
            omega,
            lambda1: lambda.0,
            lambda2: lambda.1,
            b_tilde: breakup.b_tilde,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.horizon,
            self.k1,
            self.mu,
            self.sigma,
            self.k2,
            self.alpha,
            self.n_fragments,
            self.eta_omega,
            self.omega,
            self.lambda1,
            self.lambda2,
            self.b_tilde,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(config("envelope parameters must be finite"));
        }
        if self.horizon < 0.0 || self.k1 < 0.0 || self.k2 < 0.0 {
            return Err(config("T, k1 and k2 must be nonnegative"));
        }
        if !(0.0..1.0).contains(&self.sigma) {
            return Err(config(format!("sigma must lie in [0, 1), got {}", self.sigma)));
        }
        let gap = self.mu - self.sigma;
        if !(0.0..=1.0).contains(&gap) {
            return Err(config(format!("mu - sigma must lie in [0, 1], got {gap}")));
        }
        if !(self.omega > self.sigma && self.omega < 1.0) {
            return Err(config(format!("omega must lie in (sigma, 1) = ({}, 1), got {}", self.sigma, self.omega)));
        }
        if !(self.lambda1 > 0.0 && self.lambda1 < self.lambda2) {
            return Err(config("need 0 < lambda1 < lambda2"));
        }
        if self.n_fragments < 1.0 {
            return Err(config("fragment count N must be at least 1"));
        }
        Ok(())
    }

    pub fn k_mu(&self) -> f64 {
        k_mu(self.mu)
    }

    pub fn with_horizon(&self, horizon: f64) -> Self {
        Self { horizon, ..self.clone() }
    }
}

/// `P_0(T) = [M_0(0) + 4 k2 (N-1) P_1² T] exp(8 k2 (N-1) P_1 T)`.
pub fn envelope_p0(params: &EnvelopeParams, m0_init: f64, p1: f64) -> f64 {
    let a = params.k2 * (params.n_fragments - 1.0) * p1 * params.horizon;
    (m0_init + 4.0 * a * p1) * (8.0 * a).exp()
}

/// `P_2(T)`; returns `M_2(0)` when `3^mu P_0 + k(mu) P_1 = 0`.
pub fn envelope_p2(params: &EnvelopeParams, m2_init: f64, p0: f64, p1: f64) -> f64 {
    let c = 3f64.powf(params.mu);
    let km = params.k_mu();
    let denom = c * p0 + km * p1;
    if denom == 0.0 {
        return m2_init;
    }
    let growth = (2.0 * params.k1 * denom * params.horizon).exp();
    m2_init * growth + 0.5 * (c * p0 * p0 + km * p1 * p1) / denom * (growth - 1.0)
}

/// `b = (k+1) k1 k(mu) P_1` of the higher-moment recursion.
pub fn recursion_rate(params: &EnvelopeParams, k: u32, p1: f64) -> f64 {
    (k as f64 + 1.0) * params.k1 * params.k_mu() * p1
}

/// `Omega_2(T) = Omega + (k+1) k1 [3 P_0² + 2·3^mu P_0 P_2 + k(mu) P_k P_1 + k(mu) P_k P_2]`.
pub fn recursion_forcing(params: &EnvelopeParams, k: u32, omega: f64, pk: f64, p0: f64, p1: f64, p2: f64) -> f64 {
    let c = (k as f64 + 1.0) * params.k1;
    let km = params.k_mu();
    omega + c * (3.0 * p0 * p0 + 2.0 * 3f64.powf(params.mu) * p0 * p2 + km * pk * p1 + km * pk * p2)
}

/// Arguments of the `P_{k+1}` recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecursionInputs {
    pub k: u32,
    pub pk: f64,
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub mk1_init: f64,
    /// Bound `Omega(T)` on the remaining binomial terms.
    pub omega: f64,
}

impl RecursionInputs {
    fn check(&self) -> Result<()> {
        if self.k < 2 {
            return Err(config(format!("recursion starts at k = 2, got {}", self.k)));
        }
        Ok(())
    }
}

/// `P_{k+1}(T) = e^{bT}(b/Omega_2 + M_{k+1}(0)) - b/Omega_2` as printed.
/// `Omega_2 = 0` yields the limit `M_{k+1}(0) e^{bT}`.
pub fn envelope_pk_plus_1(params: &EnvelopeParams, inputs: &RecursionInputs) -> Result<f64> {
    inputs.check()?;
    let b = recursion_rate(params, inputs.k, inputs.p1);
    let omega2 = recursion_forcing(params, inputs.k, inputs.omega, inputs.pk, inputs.p0, inputs.p1, inputs.p2);
    let growth = (b * params.horizon).exp();
    if omega2 == 0.0 {
        return Ok(inputs.mk1_init * growth);
    }
    let shift = b / omega2;
    Ok(growth * (shift + inputs.mk1_init) - shift)
}

/// Solution of `M' <= b M + Omega_2`: `e^{bT}(Omega_2/b + M_{k+1}(0)) - Omega_2/b`,
/// continued to `M_{k+1}(0) + Omega_2 T` at `b = 0`.
pub fn envelope_pk_plus_1_gronwall(params: &EnvelopeParams, inputs: &RecursionInputs) -> Result<f64> {
    inputs.check()?;
    let b = recursion_rate(params, inputs.k, inputs.p1);
    let omega2 = recursion_forcing(params, inputs.k, inputs.omega, inputs.pk, inputs.p0, inputs.p1, inputs.p2);
    let t = params.horizon;
    // (e^{bT} - 1)/b, written to stay accurate as b -> 0.
    let integral = if b * t == 0.0 { t } else { (b * t).exp_m1() / b };
    Ok(inputs.mk1_init * (b * t).exp() + omega2 * integral)
}

fn negative_rate(params: &EnvelopeParams, p0: f64, p1: f64) -> f64 {
    2.0 * (params.eta_omega - 1.0) * params.k2 * (p0 + p1)
}

/// `P_{-omega}(T) = e^{aT}(1/P_1 + M_{-omega}(0)) - 1/P_1`, `a = 2(eta - 1) k2 (P_0 + P_1)`, as printed.
pub fn envelope_p_negative(params: &EnvelopeParams, mneg_init: f64, p0: f64, p1: f64) -> Result<f64> {
    if p1 == 0.0 {
        return Err(Error::Degenerate("P_1 = 0 in the negative-moment envelope".into()));
    }
    let growth = (negative_rate(params, p0, p1) * params.horizon).exp();
    Ok(growth * (1.0 / p1 + mneg_init) - 1.0 / p1)
}

/// Solution of `M' <= a (M + P_1)`: `e^{aT}(P_1 + M_{-omega}(0)) - P_1`.
pub fn envelope_p_negative_gronwall(params: &EnvelopeParams, mneg_init: f64, p0: f64, p1: f64) -> f64 {
    let growth = (negative_rate(params, p0, p1) * params.horizon).exp();
    growth * (p1 + mneg_init) - p1
}

fn e_rate(params: &EnvelopeParams) -> f64 {
    0.5 * params.k1 * (1.0 + params.lambda2).powf(params.mu)
}

/// `E(x, t) = E0 exp(½ k1 E0 x (1+lambda2)^mu lambda1^-sigma (e^t - 1) + t)` on `[lambda1, lambda2]`.
pub fn uniform_bound_e(x: f64, t: f64, e0: f64, params: &EnvelopeParams) -> Result<f64> {
    if !(x >= params.lambda1 && x <= params.lambda2) {
        return Err(domain(format!("x = {x} lies outside [{}, {}]", params.lambda1, params.lambda2)));
    }
    if t < 0.0 {
        return Err(domain(format!("t must be nonnegative, got {t}")));
    }
    let arg = e_rate(params) * e0 * x * params.lambda1.powf(-params.sigma) * t.exp_m1() + t;
    Ok(e0 * arg.exp())
}

/// `S(T) = E0 exp(½ E0 k1 (1+lambda2)^mu lambda1^(1-sigma) (e^T - 1) + T)`, as printed.
pub fn s_bound(e0: f64, params: &EnvelopeParams) -> f64 {
    let t = params.horizon;
    let arg = e_rate(params) * e0 * params.lambda1.powf(1.0 - params.sigma) * t.exp_m1() + t;
    e0 * arg.exp()
}

/// `sup_x E(x, T) = E(lambda2, T)`, the supremum of the pointwise bound itself.
pub fn s_bound_sup(e0: f64, params: &EnvelopeParams) -> f64 {
    uniform_bound_e(params.lambda2, params.horizon, e0, params).expect("lambda2 lies in its own interval")
}

/// `E0 = max(sup g(x,0)/x^sigma over [lambda1, lambda2], k2 lambda1^(-sigma-1) B̃ (P_0 + P_1)²)`,
/// the supremum taken over cells whose pivot lies in the interval.
pub fn initial_pointwise_bound(density: &[f64], grid: &MassGrid, params: &EnvelopeParams, p0: f64, p1: f64) -> f64 {
    let mut c0: f64 = 0.0;
    for (g, p) in density.iter().zip(grid.pivots()) {
        if *p >= params.lambda1 && *p <= params.lambda2 {
            c0 = c0.max(g / p.powf(params.sigma));
        }
    }
    let fragments = params.k2 * params.lambda1.powf(-params.sigma - 1.0) * params.b_tilde * (p0 + p1).powi(2);
    c0.max(fragments)
}

/// Envelopes over `[0, T]` built from the initial moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelopes {
    pub horizon: f64,
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub p_negative: f64,
    pub p_negative_gronwall: f64,
    pub e0: f64,
    pub s: f64,
    pub s_sup: f64,
}

impl Envelopes {
    pub fn compute(params: &EnvelopeParams, initial: &[f64], grid: &MassGrid) -> Result<Self> {
        let m0 = moment_of(initial, grid, 0.0);
        let p1 = moment_of(initial, grid, 1.0);
        let m2 = moment_of(initial, grid, 2.0);
        let mneg = moment_of(initial, grid, -params.omega);
        let p0 = envelope_p0(params, m0, p1);
        let e0 = initial_pointwise_bound(initial, grid, params, p0, p1);
        Ok(Self {
            horizon: params.horizon,
            p0,
            p1,
            p2: envelope_p2(params, m2, p0, p1),
            p_negative: envelope_p_negative(params, mneg, p0, p1)?,
            p_negative_gronwall: envelope_p_negative_gronwall(params, mneg, p0, p1),
            e0,
            s: s_bound(e0, params),
            s_sup: s_bound_sup(e0, params),
        })
    }
}

/// One `(t, M_xi, envelope, margin)` row; a negative margin is an exceedance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub t: f64,
    pub xi: f64,
    pub moment: f64,
    pub envelope: f64,
    pub margin: f64,
}

/// Compares `M_0`, `M_1`, `M_2` and `M_{-omega}` at each sample with the
/// envelopes evaluated at horizon `T = t`.
pub fn envelope_rows(traj: &Trajectory, params: &EnvelopeParams) -> Result<Vec<EnvelopeRow>> {
    let first = traj.samples.first().ok_or_else(|| config("trajectory has no samples"))?;
    let grid = &traj.grid;
    let mut rows = Vec::with_capacity(4 * traj.samples.len());
    for sample in &traj.samples {
        let t = sample.t();
        let env = Envelopes::compute(&params.with_horizon(t), &first.state.density, grid)?;
        for (xi, bound) in [(-params.omega, env.p_negative), (0.0, env.p0), (1.0, env.p1), (2.0, env.p2)] {
            let m = moment_of(&sample.state.density, grid, xi);
            rows.push(EnvelopeRow { t, xi, moment: m, envelope: bound, margin: bound - m });
        }
    }
    Ok(rows)
}
