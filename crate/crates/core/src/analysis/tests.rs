use super::*;
use crate::kernels::{truncate, BreakupKernel, CoagulationKernel, CollisionKernel};
use crate::solver::{run, Sample};
use approx::assert_relative_eq;

fn base_config(grid: MassGrid, k: f64, c: f64, n: u32, t_end: f64) -> SolverConfig {
    let coag = CoagulationKernel::constant(k).unwrap();
    let coll = if c == 0.0 { CollisionKernel::zero() } else { CollisionKernel::constant(c).unwrap() };
    let mut cfg = SolverConfig::new(grid, truncate(coag, coll, n).unwrap(), BreakupKernel::power_law(0.0).unwrap(), t_end);
    cfg.sample_count = 5;
    cfg
}

fn params(k1: f64, mu: f64, k2: f64) -> EnvelopeParams {
    EnvelopeParams {
        horizon: 1.0,
        k1,
        mu,
        sigma: 0.0,
        k2,
        alpha: 0.0,
        n_fragments: 2.0,
        eta_omega: 4.0,
        omega: 0.5,
        lambda1: 0.5,
        lambda2: 2.0,
        b_tilde: 2.0,
    }
}

fn exp_g0(x: f64) -> f64 {
    (-x).exp()
}

fn synthetic(grid: &MassGrid, states: Vec<Vec<f64>>) -> Trajectory {
    let samples = states
        .into_iter()
        .enumerate()
        .map(|(k, density)| Sample {
            state: State { t: k as f64, ..State::new(density) },
            moments: Vec::new(),
            mass_drift: 0.0,
            dt: 0.0,
        })
        .collect();
    Trajectory {
        config_hash: String::new(),
        grid: grid.clone(),
        moment_orders: Vec::new(),
        samples,
        dt_history: Vec::new(),
        rejected_steps: 0,
    }
}

#[test]
fn zero_kernel_run_has_zero_drift() {
    let cfg = base_config(MassGrid::geometric(0.01, 100.0, 20).unwrap(), 0.0, 0.0, 100, 1.0);
    let r = mass_conservation_report(&run(&cfg, exp_g0).unwrap(), 1e-8).unwrap();
    assert_eq!(r.raw_drift, 0.0);
    assert_eq!(r.adjusted_drift, 0.0);
    assert!(r.passed && !r.absolute);
}

#[test]
fn constant_kernel_run_conserves_mass() {
    let cfg = base_config(MassGrid::geometric(1e-3, 1e4, 60).unwrap(), 1.0, 0.0, 10_000, 1.0);
    let r = mass_conservation_report(&run(&cfg, exp_g0).unwrap(), 1e-8).unwrap();
    assert!(r.passed, "{r:?}");
}

#[test]
fn overflow_is_recovered_by_adjustment() {
    let cfg = base_config(MassGrid::geometric(0.1, 4.0, 12).unwrap(), 2.0, 0.0, 100, 1.0);
    let traj = run(&cfg, |x| if x > 1.0 { 1.0 } else { 0.0 }).unwrap();
    assert!(traj.last().state.overflow_mass > 0.0);
    let r = mass_conservation_report(&traj, 1e-8).unwrap();
    assert!(r.raw_drift < -1e-3);
    assert!(r.adjusted_drift.abs() < 1e-10, "{r:?}");
}

#[test]
fn zero_initial_mass_reports_absolute_drift() {
    let grid = MassGrid::geometric(1.0, 8.0, 3).unwrap();
    let r = mass_conservation_report(&synthetic(&grid, vec![vec![0.0; 3], vec![0.0, 1.0, 0.0]]), 1e-8).unwrap();
    assert!(r.absolute);
    assert_relative_eq!(r.raw_drift, grid.pivots()[1] * grid.widths()[1]);
    assert!(!r.passed);
}

#[test]
fn weighted_norm_examples() {
    let grid = MassGrid::geometric(1.0, 8.0, 3).unwrap();
    assert_eq!(weighted_norm(&State::zeros(3), &grid, 1.0, 0.5), 0.0);
    let ones = State::new(vec![1.0; 3]);
    let expected: f64 = grid.pivots().iter().zip(grid.widths()).map(|(p, w)| (p + p.powf(-0.5)) * w).sum();
    assert_relative_eq!(weighted_norm(&ones, &grid, 1.0, 0.5), expected, max_relative = 1e-15);
    assert!(weighted_norm(&ones, &grid, 1.0, 0.5) >= moment_of(&ones.density, &grid, 1.0));
}

#[test]
fn distance_examples() {
    let grid = MassGrid::geometric(0.1, 10.0, 6).unwrap();
    let g = synthetic(&grid, vec![vec![1.0, 2.0, 0.5, 0.0, 3.0, 1.0]; 3]);
    let zero = synthetic(&grid, vec![vec![0.0; 6]; 3]);
    let q = uniqueness_distance(&g, &g, 0.4).unwrap();
    assert!(q.q.iter().all(|&v| v == 0.0));
    let q = uniqueness_distance(&g, &zero, 0.4).unwrap();
    let direct: f64 = g.samples[0]
        .state
        .density
        .iter()
        .zip(grid.pivots())
        .zip(grid.widths())
        .map(|((d, p), w)| (p + p.powf(-0.4)) * d * w)
        .sum();
    assert_relative_eq!(q.q[0], direct, max_relative = 1e-15);
    assert_eq!(q.times, vec![0.0, 1.0, 2.0]);
}

#[test]
fn distance_rejects_mismatches() {
    let a = synthetic(&MassGrid::geometric(0.1, 10.0, 6).unwrap(), vec![vec![0.0; 6]; 2]);
    let b = synthetic(&MassGrid::geometric(0.1, 10.0, 7).unwrap(), vec![vec![0.0; 7]; 2]);
    assert!(matches!(uniqueness_distance(&a, &b, 0.5), Err(crate::Error::Config(_))));
    let c = synthetic(&MassGrid::geometric(0.1, 10.0, 6).unwrap(), vec![vec![0.0; 6]; 3]);
    assert!(uniqueness_distance(&a, &c, 0.5).is_err());
}

#[test]
fn perturbed_initial_distance_is_linear() {
    let grid = MassGrid::geometric(0.01, 50.0, 30).unwrap();
    let cfg = base_config(grid.clone(), 1.0, 0.0, 100, 0.5);
    let g = run(&cfg, exp_g0).unwrap();
    let h = run(&cfg, |x| 1.01 * exp_g0(x)).unwrap();
    let h2 = run(&cfg, |x| 1.02 * exp_g0(x)).unwrap();
    let q = uniqueness_distance(&g, &h, 0.5).unwrap();
    let q2 = uniqueness_distance(&g, &h2, 0.5).unwrap();
    let zero = synthetic(&grid, vec![vec![0.0; 30]; g.samples.len()]);
    let mut zero = zero;
    for (s, z) in g.samples.iter().zip(zero.samples.iter_mut()) {
        z.state.t = s.state.t;
    }
    let norm = uniqueness_distance(&g, &zero, 0.5).unwrap().q[0];
    assert_relative_eq!(q.q[0], 0.01 * norm, max_relative = 1e-12);
    assert_relative_eq!(q2.q[0], 2.0 * q.q[0], max_relative = 1e-12);
}

#[test]
fn psi_examples() {
    assert_eq!(gronwall_constant_psi(0.0, 0.0, &params(1.0, 0.0, 1.0), 3.0), 0.0);
    assert_eq!(gronwall_constant_psi(2.0, 3.0, &params(0.0, 0.0, 0.0), 3.0), 0.0);
    assert_eq!(gronwall_constant_psi(1.0, 1.0, &params(1.0, 0.0, 0.0), 3.0), 8.0);
    // 4[2·2 + 2·3 + 2·0.5·2 + 0.5·4·2 + 0.5·3·3] with mu = 1, k1 = 2, k2 = 0.5, eta = 3.
    let psi = gronwall_constant_psi(2.0, 3.0, &EnvelopeParams { k1: 2.0, ..params(2.0, 1.0, 0.5) }, 3.0);
    assert_relative_eq!(psi, 4.0 * (8.0 + 12.0 + 2.0 + 4.0 + 4.5));
}

#[test]
fn contraction_examples() {
    let zero = DistanceSeries { times: vec![0.0, 0.5, 1.0], q: vec![0.0; 3] };
    assert!(contraction_check(&zero, 0.0, 0.0).passed);
    let ok = DistanceSeries { times: vec![0.0, 0.5, 1.0], q: vec![1.0, 1.2, 1.5] };
    let r = contraction_check(&ok, 1.0, 1e-9);
    assert!(r.passed && r.rows.iter().all(|row| row.margin > 0.0));
    // Growth at e^{2 Psi t} breaks the bound after t = 0.
    let psi: f64 = 0.7;
    let bad = DistanceSeries {
        times: vec![0.0, 0.5, 1.0],
        q: [0.0, 0.5, 1.0].iter().map(|t: &f64| (2.0 * psi * t).exp()).collect(),
    };
    let r = contraction_check(&bad, psi, 1e-9);
    assert!(!r.passed);
    assert_eq!(r.witness, Some(0.5));
}

#[test]
fn theta_constraints() {
    let a = AnalysisConfig { theta: 0.5, sigma1: 2.0, sigma2: 0.9 };
    assert!(a.validate().is_ok());
    let c = a.theta_constraints(1.0 / 3.0);
    assert!(c.weights_hold && c.distance_holds);
    assert_eq!(c.binding, "sigma2");
    assert_relative_eq!(c.theta_max.unwrap(), 0.9 - 1.0 / 3.0);
    let c = a.theta_constraints(0.5);
    assert!(!c.weights_hold);
    assert_eq!(c.theta_max, None);
    assert!(AnalysisConfig { theta: 1.0, ..a.clone() }.validate().is_err());
    assert!(AnalysisConfig { sigma1: 0.5, ..a.clone() }.validate().is_err());
    assert!(AnalysisConfig { sigma2: 1.0, ..a }.validate().is_err());
}

#[test]
fn truncation_convergence_edge_cases() {
    let grid = MassGrid::geometric(0.1, 10.0, 10).unwrap();
    let cfg = base_config(grid, 0.0, 0.0, 5, 0.5);
    // Zero kernels are unchanged by every truncation.
    let r = truncation_convergence(&cfg, exp_g0, &[5, 6, 8], 0.5).unwrap();
    assert_eq!(r.pairs.len(), 2);
    assert!(r.pairs.iter().all(|p| p.sup_q == 0.0));
    assert!(r.monotone);
    assert!(truncation_convergence(&cfg, exp_g0, &[5], 0.5).unwrap().pairs.is_empty());
    assert!(truncation_convergence(&cfg, exp_g0, &[8, 5], 0.5).is_err());
    assert!(truncation_convergence(&cfg, exp_g0, &[5, 20], 0.5).is_err());
}

#[test]
fn constant_kernel_oracle() {
    assert_eq!(oracle_constant_kernel_m0(1.0, 3.0, 0.0), 3.0);
    assert_eq!(oracle_constant_kernel_m0(1.0, 1.0, 2.0), 0.5);
    assert_eq!(oracle_constant_kernel_m0(0.0, 1.7, 5.0), 1.7);
}

#[test]
fn dense_oracle_zero_kernels() {
    let grid = MassGrid::geometric(0.5, 8.0, 4).unwrap();
    let cfg = base_config(grid, 0.0, 0.0, 16, 1.0);
    let g0 = vec![1.0, 0.5, 0.25, 0.125];
    let traj = oracle_dense_ode(&cfg, &g0).unwrap();
    assert_eq!(traj.samples.len(), 5);
    assert!(traj.samples.iter().all(|s| s.state.density == g0));
}

#[test]
fn dense_oracle_two_cell_hand_ode() {
    let r = std::f64::consts::SQRT_2;
    let grid = MassGrid::geometric(1.0 / r, 2.0 * r, 2).unwrap();
    let cfg = base_config(grid.clone(), 1.0, 0.0, 2, 1.0);
    let n0 = 0.8;
    let traj = oracle_dense_ode(&cfg, &[n0 / grid.widths()[0], 0.0]).unwrap();
    for s in &traj.samples {
        let n1 = n0 / (1.0 + n0 * s.t());
        let n2 = 0.5 * (n0 - n1);
        assert!((s.state.density[0] * grid.widths()[0] - n1).abs() <= 1e-6);
        assert!((s.state.density[1] * grid.widths()[1] - n2).abs() <= 1e-6);
    }
}

#[test]
fn dense_oracle_rejects_large_grids() {
    let cfg = base_config(MassGrid::geometric(0.5, 8.0, 7).unwrap(), 1.0, 0.0, 16, 1.0);
    assert!(oracle_dense_ode(&cfg, &[0.0; 7]).is_err());
}
