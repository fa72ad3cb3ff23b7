use cofrag_core::oracle_dense_ode;
use cofrag_core::kernels::{BreakupFamily, CoagulationFamily, DaughterProfile};
use cofrag_core::{
    project_initial_condition, truncate, BreakupKernel, CoagulationKernel, CollisionKernel, GrowthBound, MassGrid,
    Solver, SolverConfig, State,
};

fn relative_l1(grid: &MassGrid, a: &[f64], b: &[f64]) -> f64 {
    let w = grid.widths();
    let diff: f64 = a.iter().zip(b).zip(w).map(|((x, y), w)| (x - y).abs() * w).sum();
    let norm: f64 = b.iter().zip(w).map(|(y, w)| y.abs() * w).sum();
    diff / norm
}

fn compare(cfg: SolverConfig, g0: Vec<f64>) -> f64 {
    let grid = cfg.grid.clone();
    let oracle = oracle_dense_ode(&cfg, &g0).unwrap();
    let mut tight = cfg;
    tight.rtol = 1e-10;
    tight.atol = 1e-13;
    let traj = Solver::new(tight).unwrap().run_from(State::new(g0)).unwrap();
    assert_eq!(traj.times(), oracle.times());
    traj.samples
        .iter()
        .zip(&oracle.samples)
        .map(|(s, o)| relative_l1(&grid, &s.state.density, &o.state.density))
        .fold(0.0, f64::max)
}

#[test]
fn six_cells_granulation_with_fragmentation() {
    let grid = MassGrid::geometric(0.25, 16.0, 6).unwrap();
    let coag = CoagulationKernel::granulation(0.5, 1.0, 0.5, GrowthBound::new(0.5, 1.0, 0.5)).unwrap();
    let kernels = truncate(coag, CollisionKernel::product_bounded(0.1, 0.5).unwrap(), 8).unwrap();
    let mut cfg = SolverConfig::new(grid.clone(), kernels, BreakupKernel::power_law(-0.25).unwrap(), 1.0);
    cfg.sample_count = 4;
    let g0 = project_initial_condition(&grid, |x| x * (-x).exp()).unwrap();
    let err = compare(cfg, g0);
    assert!(err <= 1e-5, "relative L1 {err}");
}

#[test]
fn tabulated_daughter_profile() {
    let grid = MassGrid::geometric(0.5, 8.0, 4).unwrap();
    let profile = DaughterProfile::new(vec![0.25, 0.5, 1.0], vec![1.0, 3.0, 1.0]).unwrap();
    let breakup = BreakupKernel::new(BreakupFamily::Custom { profile }, 4.0).unwrap();
    let coag = CoagulationKernel::new(CoagulationFamily::BrownianContinuum, 0.3, GrowthBound::new(1.2, 2.0 / 3.0, 1.0 / 3.0)).unwrap();
    let kernels = truncate(coag, CollisionKernel::constant(0.3).unwrap(), 16).unwrap();
    let cfg = SolverConfig::new(grid.clone(), kernels, breakup, 0.5);
    let g0 = project_initial_condition(&grid, |x| (-x / 2.0).exp()).unwrap();
    let err = compare(cfg, g0);
    assert!(err <= 1e-5, "relative L1 {err}");
}
